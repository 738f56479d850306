#include "regrow/alphabet.hpp"

#include <algorithm>

#include "regrow/errors.hpp"

namespace regrow {

namespace {

std::string letters(char lo, char hi) {
  std::string s;
  for (char c = lo; c <= hi; ++c) s.push_back(c);
  return s;
}

}  // namespace

std::shared_ptr<const Alphabet> Alphabet::printable_ascii() {
  static const std::shared_ptr<const Alphabet> instance = make(letters(0x20, 0x7e));
  return instance;
}

std::shared_ptr<const Alphabet> Alphabet::make(std::string_view chars, bool builtin_classes) {
  std::shared_ptr<Alphabet> alphabet(new Alphabet());
  for (char c : chars) {
    if (!alphabet->contains(c)) {
      alphabet->mask_.set(static_cast<unsigned char>(c));
      alphabet->chars_.push_back(c);
    }
  }
  std::sort(alphabet->chars_.begin(), alphabet->chars_.end());
  if (alphabet->chars_.empty()) throw InputError("alphabet must not be empty");

  if (builtin_classes) {
    const std::string all(alphabet->chars_.begin(), alphabet->chars_.end());
    for (auto [name, regex_token, grammar_token, members] :
         {std::tuple{"ALPHA", "[a-z]", "[a-z]", letters('a', 'z')},
          std::tuple{"DIGIT", "\\d", "[0-9]", letters('0', '9')},
          std::tuple{"DOT", ".", ".", all}}) {
      std::string kept;
      for (char c : members)
        if (alphabet->contains(c)) kept.push_back(c);
      if (!kept.empty()) alphabet->add_class(name, regex_token, grammar_token, kept);
    }
  }
  return alphabet;
}

std::shared_ptr<const Alphabet> Alphabet::with_class(std::string name, std::string regex_token,
                                                     std::string grammar_token,
                                                     std::string_view members) const {
  std::shared_ptr<Alphabet> copy(new Alphabet(*this));
  copy->add_class(std::move(name), std::move(regex_token), std::move(grammar_token), members);
  return copy;
}

void Alphabet::add_class(std::string name, std::string regex_token, std::string grammar_token,
                         std::string_view members) {
  if (classes_.size() >= 255) throw InputError("too many character classes");
  for (const auto& c : classes_) {
    if (c.name == name || c.regex_token == regex_token || c.grammar_token == grammar_token)
      throw InputError("character class '" + name + "' collides with '" + c.name + "'");
  }
  CharClass cls;
  cls.id = ClassId{static_cast<std::uint8_t>(classes_.size())};
  cls.name = std::move(name);
  cls.regex_token = std::move(regex_token);
  cls.grammar_token = std::move(grammar_token);
  for (char c : members) {
    if (!contains(c)) throw InputError("class '" + cls.name + "' has a member outside the alphabet");
    if (!cls.contains(c)) {
      cls.mask.set(static_cast<unsigned char>(c));
      cls.members.push_back(c);
    }
  }
  if (cls.members.empty()) throw InputError("class '" + cls.name + "' is empty");
  std::sort(cls.members.begin(), cls.members.end());
  classes_.push_back(std::move(cls));
}

const CharClass& Alphabet::cls(ClassId id) const {
  if (id.index >= classes_.size()) throw ContractViolation("unknown character class id");
  return classes_[id.index];
}

std::optional<ClassId> Alphabet::find_by_name(std::string_view name) const {
  for (const auto& c : classes_)
    if (c.name == name) return c.id;
  return std::nullopt;
}

std::vector<ClassId> Alphabet::classes_containing(char c) const {
  std::vector<ClassId> out;
  for (const auto& cls : classes_)
    if (cls.contains(c)) out.push_back(cls.id);
  return out;
}

bool operator==(const Alphabet& a, const Alphabet& b) {
  if (&a == &b) return true;
  if (a.chars_ != b.chars_ || a.classes_.size() != b.classes_.size()) return false;
  for (std::size_t i = 0; i < a.classes_.size(); ++i) {
    if (a.classes_[i].name != b.classes_[i].name || a.classes_[i].members != b.classes_[i].members)
      return false;
  }
  return true;
}

}  // namespace regrow
