#pragma once

#include <bitset>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regrow {

struct ClassId {
  std::uint8_t index = 0;
  friend auto operator<=>(ClassId, ClassId) = default;
};

// A named set of terminals usable as a single rule emission. `regex_token` is
// how the class prints inside a regex (`\d`), `grammar_token` how it prints in
// grammar text (`[0-9]`).
struct CharClass {
  ClassId id;
  std::string name;
  std::string regex_token;
  std::string grammar_token;
  std::vector<char> members;  // sorted, unique, nonempty
  std::bitset<256> mask;

  bool contains(char c) const { return mask.test(static_cast<unsigned char>(c)); }
  std::size_t size() const { return members.size(); }
};

// Terminal alphabet plus the registry of character classes defined over it.
class Alphabet {
 public:
  // The 95 printable ASCII characters with ALPHA=[a-z], DIGIT=[0-9] and DOT.
  static std::shared_ptr<const Alphabet> printable_ascii();

  // Custom alphabet. Builtin classes are intersected with `chars`; a class
  // whose intersection is empty is left out.
  static std::shared_ptr<const Alphabet> make(std::string_view chars, bool builtin_classes = true);

  // Returns a copy with one more class. Members must be a nonempty subset of
  // the alphabet and the tokens must not collide with registered ones.
  std::shared_ptr<const Alphabet> with_class(std::string name, std::string regex_token,
                                             std::string grammar_token,
                                             std::string_view members) const;

  bool contains(char c) const { return mask_.test(static_cast<unsigned char>(c)); }
  std::span<const char> chars() const { return chars_; }
  std::size_t size() const { return chars_.size(); }

  std::span<const CharClass> classes() const { return classes_; }
  const CharClass& cls(ClassId id) const;
  std::optional<ClassId> find_by_name(std::string_view name) const;
  std::optional<ClassId> dot() const { return find_by_name("DOT"); }

  // Classes containing c, in registry order.
  std::vector<ClassId> classes_containing(char c) const;

  friend bool operator==(const Alphabet& a, const Alphabet& b);

 private:
  Alphabet() = default;
  void add_class(std::string name, std::string regex_token, std::string grammar_token,
                 std::string_view members);

  std::vector<char> chars_;
  std::bitset<256> mask_;
  std::vector<CharClass> classes_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

}  // namespace regrow
