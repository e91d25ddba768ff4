// Letter categories (vertical extent classes) and the group partition used
// by the root decision and the branch layout.
#pragma once

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrbf {

enum class Category { central, ascendant, descendent, ascendant_descendent };

inline std::string category_name(Category c) {
  switch (c) {
    case Category::central: return "central";
    case Category::ascendant: return "ascendant";
    case Category::descendent: return "descendent";
    case Category::ascendant_descendent: return "ascendant_descendent";
  }
  throw std::invalid_argument("category_name: unknown category");
}

inline Category category_from_name(const std::string& s) {
  if (s == "central") return Category::central;
  if (s == "ascendant") return Category::ascendant;
  if (s == "descendent") return Category::descendent;
  if (s == "ascendant_descendent") return Category::ascendant_descendent;
  throw std::invalid_argument("unknown category: " + s);
}

// Fixed typographic assignment; consistent with all the groups below.
inline Category category_of(char letter) {
  switch (letter) {
    case 'b': case 'd': case 'h': case 'i': case 'k': case 'l': case 't':
      return Category::ascendant;
    case 'g': case 'p': case 'q': case 'y':
      return Category::descendent;
    case 'f': case 'j':
      return Category::ascendant_descendent;
    default:
      if (letter >= 'a' && letter <= 'z') return Category::central;
  }
  throw std::invalid_argument(std::string("category_of: not a lower-case letter: ") + letter);
}

struct Group {
  std::string id;  // the group's letters, concatenated
  Category category = Category::central;
  std::vector<char> letters;
};

struct GroupTable {
  std::vector<Group> groups;

  int group_of(char letter) const {
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (char c : groups[i].letters)
        if (c == letter) return static_cast<int>(i);
    throw std::invalid_argument(std::string("group_of: letter not in any group: ") + letter);
  }

  int index_of(const std::string& id) const {
    for (std::size_t i = 0; i < groups.size(); ++i)
      if (groups[i].id == id) return static_cast<int>(i);
    throw std::invalid_argument("unknown group id: " + id);
  }

  std::vector<int> groups_in_category(Category c) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < groups.size(); ++i)
      if (groups[i].category == c) out.push_back(static_cast<int>(i));
    return out;
  }

  // Comma-separated groups, each a run of letters: "ao,cers,mnuvw,..."
  // Every letter must appear exactly once and groups may not span categories.
  static GroupTable from_spec(const std::string& spec) {
    GroupTable t;
    std::stringstream ss(spec);
    std::string tok;
    std::array<int, 26> seen{};
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) throw std::invalid_argument("group table: empty group");
      Group g;
      g.id = tok;
      g.category = category_of(tok[0]);
      for (char c : tok) {
        if (c < 'a' || c > 'z')
          throw std::invalid_argument(std::string("group table: bad letter: ") + c);
        if (category_of(c) != g.category)
          throw std::invalid_argument("group table: group '" + tok + "' spans categories");
        if (seen[c - 'a']++)
          throw std::invalid_argument(std::string("group table: duplicate letter: ") + c);
        g.letters.push_back(c);
      }
      t.groups.push_back(std::move(g));
    }
    for (int i = 0; i < 26; ++i)
      if (!seen[i])
        throw std::invalid_argument(std::string("group table: letter missing: ") +
                                    static_cast<char>('a' + i));
    return t;
  }

  static GroupTable defaults() {
    // Central groups follow the published partition; the other categories
    // group letters by shared loop/stroke structure.
    return from_spec("ao,cers,mnuvw,xz,bd,hk,ilt,gq,py,fj");
  }

  std::string to_spec() const {
    std::string s;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (i) s += ',';
      s += groups[i].id;
    }
    return s;
  }
};

}  // namespace mrbf
