// Copyright 2026 The meld Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "meld/attacks.hpp"
#include "meld/utf8.hpp"

namespace meld::attacks {

const HomoglyphTable& builtin_homoglyphs() {
  static const HomoglyphTable table = {
      {U'a', U'а'}, {U'c', U'с'}, {U'e', U'е'}, {U'o', U'о'},
      {U'p', U'р'}, {U'x', U'х'}, {U'y', U'у'}, {U'i', U'і'},
      {U'j', U'ј'}, {U's', U'ѕ'}, {U'h', U'һ'}, {U'd', U'ԁ'},
      {U'q', U'ԛ'}, {U'w', U'ԝ'}, {U'v', U'ν'}, {U'A', U'А'},
      {U'B', U'В'}, {U'C', U'С'}, {U'E', U'Е'}, {U'H', U'Н'},
      {U'I', U'І'}, {U'J', U'Ј'}, {U'K', U'К'}, {U'M', U'М'},
      {U'O', U'О'}, {U'P', U'Р'}, {U'S', U'Ѕ'}, {U'T', U'Т'},
      {U'X', U'Х'}, {U'Y', U'Υ'}, {U'Z', U'Ζ'}, {U'N', U'Ν'},
  };
  return table;
}

const SynonymLexicon& builtin_lexicon() {
  static const SynonymLexicon lexicon = {
      {"big", {"large", "huge"}},         {"small", {"little", "tiny"}},
      {"little", {"small", "slight"}},    {"great", {"grand", "vast"}},
      {"good", {"fine", "decent"}},       {"bad", {"poor", "awful"}},
      {"fast", {"quick", "rapid"}},       {"quick", {"fast", "swift"}},
      {"slow", {"sluggish", "gradual"}},  {"old", {"aged", "ancient"}},
      {"new", {"fresh", "novel"}},        {"said", {"stated", "remarked"}},
      {"make", {"create", "build"}},      {"made", {"built", "formed"}},
      {"see", {"view", "notice"}},        {"saw", {"noticed", "spotted"}},
      {"man", {"fellow", "person"}},      {"men", {"people", "fellows"}},
      {"day", {"date", "morning"}},       {"time", {"moment", "period"}},
      {"long", {"lengthy", "extended"}},  {"way", {"path", "manner"}},
      {"well", {"nicely", "properly"}},   {"more", {"further", "extra"}},
      {"all", {"every", "each"}},         {"one", {"single", "lone"}},
      {"then", {"next", "afterward"}},    {"there", {"yonder", "thither"}},
      {"house", {"home", "dwelling"}},    {"land", {"ground", "soil"}},
      {"sea", {"ocean", "deep"}},         {"water", {"liquid", "fluid"}},
      {"world", {"earth", "globe"}},      {"people", {"folk", "persons"}},
      {"begin", {"start", "commence"}},   {"end", {"finish", "close"}},
      {"happy", {"glad", "cheerful"}},    {"sad", {"unhappy", "gloomy"}},
      {"help", {"aid", "assist"}},        {"show", {"display", "reveal"}},
      {"find", {"discover", "locate"}},   {"give", {"offer", "grant"}},
      {"take", {"grab", "seize"}},        {"know", {"realize", "understand"}},
      {"think", {"believe", "suppose"}},  {"come", {"arrive", "approach"}},
      {"went", {"travelled", "departed"}},{"look", {"glance", "peer"}},
      {"hand", {"palm", "fist"}},         {"part", {"portion", "piece"}},
      {"place", {"spot", "location"}},    {"thing", {"object", "item"}},
      {"and", {"plus", "also"}},          {"but", {"yet", "though"}},
      {"the", {"this", "that"}},          {"was", {"seemed", "became"}},
      {"for", {"toward", "regarding"}},   {"not", {"never", "hardly"}},
  };
  return lexicon;
}

HomoglyphTable load_homoglyph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  HomoglyphTable table = builtin_homoglyphs();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("homoglyph map " + path + ": " + e.what());
  }
  for (const auto& [key, value] : j.items()) {
    const auto from = utf8::decode(key);
    const auto to = utf8::decode(value.get<std::string>());
    if (from.size() != 1 || to.size() != 1 || from[0] == to[0]) {
      throw Error("homoglyph map entries must map one code point to a different one");
    }
    table[from[0]] = to[0];
  }
  return table;
}

SynonymLexicon load_synonym_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  SynonymLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  auto lower = [](std::string s) {
    for (char& c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("synonym lexicon line " + std::to_string(line_no) + ": missing TAB");
    }
    const std::string word = lower(line.substr(0, tab));
    std::stringstream rest(line.substr(tab + 1));
    std::string syn;
    auto& list = lexicon[word];
    while (std::getline(rest, syn, ',')) {
      syn = lower(syn);
      if (!syn.empty() && syn != word) list.push_back(syn);
    }
    if (list.empty()) lexicon.erase(word);
  }
  return lexicon;
}

}  // namespace meld::attacks
