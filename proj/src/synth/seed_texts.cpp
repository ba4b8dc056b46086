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

#include "synth_internal.hpp"

namespace meld::synth::detail {

// Public-domain passages, one per domain.
const std::vector<SeedText>& seed_texts() {
  static const std::vector<SeedText> kSeeds = {
      {"fiction",
       "It is a truth universally acknowledged, that a single man in possession of a good "
       "fortune, must be in want of a wife. However little known the feelings or views of such "
       "a man may be on his first entering a neighbourhood, this truth is so well fixed in the "
       "minds of the surrounding families, that he is considered the rightful property of some "
       "one or other of their daughters. My dear Mr. Bennet, said his lady to him one day, have "
       "you heard that Netherfield Park is let at last? Mr. Bennet replied that he had not. But "
       "it is, returned she; for Mrs. Long has just been here, and she told me all about it. Mr. "
       "Bennet made no answer. Do you not want to know who has taken it? cried his wife "
       "impatiently. You want to tell me, and I have no objection to hearing it. This was "
       "invitation enough. Why, my dear, you must know, Mrs. Long says that Netherfield is taken "
       "by a young man of large fortune from the north of England; that he came down on Monday "
       "in a chaise and four to see the place, and was so much delighted with it, that he agreed "
       "with Mr. Morris immediately; that he is to take possession before Michaelmas, and some "
       "of his servants are to be in the house by the end of next week. What is his name? "
       "Bingley. Is he married or single? Oh, single, my dear, to be sure! A single man of large "
       "fortune; four or five thousand a year. What a fine thing for our girls!"},
      {"science",
       "When on board H.M.S. Beagle, as naturalist, I was much struck with certain facts in the "
       "distribution of the inhabitants of South America, and in the geological relations of "
       "the present to the past inhabitants of that continent. These facts seemed to me to "
       "throw some light on the origin of species, that mystery of mysteries, as it has been "
       "called by one of our greatest philosophers. On my return home, it occurred to me that "
       "something might perhaps be made out on this question by patiently accumulating and "
       "reflecting on all sorts of facts which could possibly have any bearing on it. After "
       "five years work I allowed myself to speculate on the subject, and drew up some short "
       "notes; these I enlarged into a sketch of the conclusions, which then seemed to me "
       "probable. In considering the origin of species, it is quite conceivable that a "
       "naturalist, reflecting on the mutual affinities of organic beings, on their "
       "embryological relations, their geographical distribution, geological succession, and "
       "other such facts, might come to the conclusion that each species had not been "
       "independently created, but had descended, like varieties, from other species. "
       "Nevertheless, such a conclusion, even if well founded, would be unsatisfactory, until "
       "it could be shown how the innumerable species inhabiting this world have been modified, "
       "so as to acquire that perfection of structure and coadaptation which most justly "
       "excites our admiration."},
      {"civic",
       "When in the course of human events it becomes necessary for one people to dissolve the "
       "political bands which have connected them with another, and to assume among the powers "
       "of the earth, the separate and equal station to which the laws of nature and of "
       "nature's God entitle them, a decent respect to the opinions of mankind requires that "
       "they should declare the causes which impel them to the separation. We hold these truths "
       "to be self evident, that all men are created equal, that they are endowed by their "
       "creator with certain unalienable rights, that among these are life, liberty and the "
       "pursuit of happiness. That to secure these rights, governments are instituted among "
       "men, deriving their just powers from the consent of the governed. That whenever any "
       "form of government becomes destructive of these ends, it is the right of the people to "
       "alter or to abolish it, and to institute new government, laying its foundation on such "
       "principles and organizing its powers in such form, as to them shall seem most likely to "
       "effect their safety and happiness. Prudence, indeed, will dictate that governments long "
       "established should not be changed for light and transient causes; and accordingly all "
       "experience hath shewn, that mankind are more disposed to suffer, while evils are "
       "sufferable, than to right themselves by abolishing the forms to which they are "
       "accustomed."},
      {"sea",
       "Call me Ishmael. Some years ago, never mind how long precisely, having little or no "
       "money in my purse, and nothing particular to interest me on shore, I thought I would "
       "sail about a little and see the watery part of the world. It is a way I have of driving "
       "off the spleen and regulating the circulation. Whenever I find myself growing grim "
       "about the mouth; whenever it is a damp, drizzly November in my soul; whenever I find "
       "myself involuntarily pausing before coffin warehouses, and bringing up the rear of "
       "every funeral I meet; and especially whenever my hypos get such an upper hand of me, "
       "that it requires a strong moral principle to prevent me from deliberately stepping into "
       "the street, and methodically knocking people's hats off, then, I account it high time "
       "to get to sea as soon as I can. This is my substitute for pistol and ball. With a "
       "philosophical flourish Cato throws himself upon his sword; I quietly take to the ship. "
       "There is nothing surprising in this. If they but knew it, almost all men in their "
       "degree, some time or other, cherish very nearly the same feelings towards the ocean "
       "with me. There now is your insular city of the Manhattoes, belted round by wharves as "
       "Indian isles by coral reefs; commerce surrounds it with her surf."},
      {"essay",
       "I went to the woods because I wished to live deliberately, to front only the essential "
       "facts of life, and see if I could not learn what it had to teach, and not, when I came "
       "to die, discover that I had not lived. I did not wish to live what was not life, living "
       "is so dear; nor did I wish to practise resignation, unless it was quite necessary. I "
       "wanted to live deep and suck out all the marrow of life, to live so sturdily and "
       "Spartan like as to put to rout all that was not life, to cut a broad swath and shave "
       "close, to drive life into a corner, and reduce it to its lowest terms. Our life is "
       "frittered away by detail. An honest man has hardly need to count more than his ten "
       "fingers, or in extreme cases he may add his ten toes, and lump the rest. Simplicity, "
       "simplicity, simplicity! I say, let your affairs be as two or three, and not a hundred "
       "or a thousand; instead of a million count half a dozen, and keep your accounts on your "
       "thumb nail. In the midst of this chopping sea of civilized life, such are the clouds "
       "and storms and quicksands and thousand and one items to be allowed for, that a man has "
       "to live, if he would not founder and go to the bottom and not make his port at all, by "
       "dead reckoning, and he must be a great calculator indeed who succeeds."},
  };
  return kSeeds;
}

}  // namespace meld::synth::detail
