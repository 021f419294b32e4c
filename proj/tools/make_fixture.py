#!/usr/bin/env python3
"""Writes the synthetic story corpus used by the tests and the acceptance suite.

Each story is written with two light markers:
  "|"  ends an elementary discourse unit
  "*"  marks the dependency root of the unit
Every other token of a unit is attached to the unit root; every unit after
the first is attached to the previous unit.

Usage: make_fixture.py OUT.jsonl
"""
import json
import sys

DETS = {"a", "an", "the", "his", "her", "their", "its", "my", "your", "every"}
PUNCT = {".", ",", "?", "!", ";", ":"}

# (id, text, [(qtype, question, answer, spans_multiple)])
STORIES = [
    ("p01",
     "once upon a time there *was a farmer who had carted pears to market . | "
     "since they *were very sweet and fragrant , | he *hoped to get a good price for the pears . | "
     "then the farmer *grew angry | and *called the bonze names .",
     [("causal", "why did the farmer hope to get a good price for the pears ?", "because they were very sweet and fragrant", False),
      ("action", "what did the farmer do when he grew angry ?", "called the bonze names", False),
      ("character", "who carted pears to market ?", "the farmer", False)]),
    ("p02",
     "maie *was a poor girl who lived by the sea . | she *wanted thirty cows | "
     "so that her family would never *be hungry again . | after she *found a golden shell , | a fairy *gave her the cows .",
     [("action", "how many cows did maie want ?", "thirty cows", False),
      ("outcome", "what happened after maie found a golden shell ?", "a fairy gave her the cows", False),
      ("causal", "why did maie want thirty cows ?", "so that her family would never be hungry again", False),
      ("prediction", "what will maie do with the cows ?", "feed her family", False)]),
    ("p03",
     "the king *danced again with the beautiful maiden . | while he *was dancing , | he *put a gold ring on her finger . | "
     "because the maiden *had stayed too long , | she *could not take off the beautiful dress .",
     [("action", "what did the king do while he was dancing ?", "put a gold ring on her finger", False),
      ("outcome", "what happened because the maiden had stayed too long ?", "she could not take off the beautiful dress", False),
      ("causal", "why did the king love the maiden ?", "because she was beautiful", True)]),
    ("p04",
     "a crow *sat in a tall tree with a piece of cheese . | the hungry fox *wanted the cheese , | "
     "so he *praised the crow 's voice . | when the crow *opened her beak to sing , | the cheese *fell to the ground .",
     [("causal", "why did the fox praise the crow 's voice ?", "because he wanted the cheese", False),
      ("outcome", "what happened when the crow opened her beak to sing ?", "the cheese fell to the ground", False),
      ("action", "what did the crow do to sing ?", "opened her beak", False)]),
    ("p05",
     "the hare *laughed at the slow tortoise . | the tortoise *challenged him to a race . | "
     "because the hare *was proud , | he *took a long nap under a tree . | the tortoise *kept walking | and *won the race .",
     [("causal", "why did the hare take a long nap under a tree ?", "because he was proud", False),
      ("action", "what did the tortoise do after the hare laughed at him ?", "challenged him to a race", False),
      ("outcome", "what happened because the tortoise kept walking ?", "he won the race", False),
      ("action", "what did the hare do because he was proud ?", "took a long nap under a tree", False)]),
    ("p06",
     "a poor miller *told the king that his daughter could spin straw into gold . | "
     "the king *locked the girl in a room full of straw . | she *began to cry | because she *could not spin gold .",
     [("action", "what did the king do to the girl ?", "locked her in a room full of straw", False),
      ("causal", "why did the girl begin to cry ?", "because she could not spin gold", False),
      ("feeling", "how did the girl feel ?", "sad", False)]),
    ("p07",
     "the wolf *came to the house of straw . | he *huffed and puffed | and *blew the house down . | "
     "the little pig *ran to his brother 's house of sticks .",
     [("outcome", "what happened after the wolf huffed and puffed ?", "he blew the house down", False)]),
    ("p08",
     "a shoemaker *had only enough leather for one pair of shoes . | he *cut the leather at night | and *went to bed . | "
     "in the morning he *found a finished pair of shoes on his table .",
     [("action", "what did the shoemaker do with the leather ?", "cut it at night", False),
      ("outcome", "what happened after the shoemaker went to bed ?", "he found a finished pair of shoes on his table", False),
      ("causal", "why did the shoemaker cut the leather at night ?", "because he had only enough leather for one pair of shoes", False)]),
    ("p09",
     "the youngest son *shared his bread with an old man . | the old man *gave him a golden goose . | "
     "everyone who touched the goose *stuck to it .",
     [("causal", "why did the old man give him a golden goose ?", "because the youngest son shared his bread with him", False),
      ("outcome", "what happened after the youngest son shared his bread ?", "the old man gave him a golden goose", False),
      ("outcome", "what happened when people touched the goose ?", "they stuck to it", False)]),
    ("p10",
     "the queen *put a pea under twenty mattresses . | the princess *slept badly all night . | "
     "because she *felt the pea , | the prince *knew she was a real princess .",
     [("outcome", "what happened because the princess felt the pea ?", "the prince knew she was a real princess", False),
      ("causal", "why did the princess sleep badly all night ?", "because there was a pea under the mattresses", False)]),
    ("p11",
     "jack *sold the family cow for five magic beans . | his mother *threw the beans out of the window . | "
     "during the night a giant beanstalk *grew into the sky .",
     [("action", "what did jack do with the family cow ?", "sold it for five magic beans", False),
      ("action", "what did jack 's mother do with the beans ?", "threw them out of the window", False),
      ("outcome", "what happened after his mother threw the beans out of the window ?", "a giant beanstalk grew into the sky", False),
      ("prediction", "what will jack find in the sky ?", "a giant", False)]),
    ("p12",
     "the girl *carried a basket to visit her grandmother . | the wolf *ran ahead | and *ate the grandmother . | "
     "then he *put on her nightcap | and *waited in the bed .",
     [("action", "what did the wolf do after he ate the grandmother ?", "put on her nightcap and waited in the bed", False),
      ("causal", "why did the girl carry a basket ?", "to visit her grandmother", False)]),
    ("p13",
     "the other ducks *laughed at the ugly duckling . | he *felt lonely | and *left the farm . | "
     "in the spring he *saw his reflection in the lake | and *discovered he was a swan .",
     [("causal", "why did the duckling leave the farm ?", "because he felt lonely", False),
      ("outcome", "what happened when the duckling saw his reflection in the lake ?", "he discovered he was a swan", False)]),
    ("p14",
     "a mouse *woke the sleeping lion . | the lion *let the mouse go | because it *promised to help him . | "
     "later the lion *was caught in a net , | and the mouse *chewed the ropes , | so the lion *was free .",
     [("causal", "why did the lion let the mouse go ?", "because it promised to help him", False),
      ("action", "what did the mouse do when the lion was caught in a net ?", "chewed the ropes", False),
      ("outcome", "what happened after the mouse chewed the ropes ?", "the lion was free", False),
      ("action", "what did the mouse do to the sleeping lion ?", "woke him", False)]),
    ("p15",
     "the cat *asked his master for a pair of boots . | he *caught a rabbit | and *gave it to the king . | "
     "the king *was pleased | and *invited them to the castle .",
     [("action", "what did the cat ask for ?", "a pair of boots", False),
      ("outcome", "what happened after the cat gave the rabbit to the king ?", "the king invited them to the castle", False)]),
    ("p16",
     "an old woman *baked a gingerbread man . | when she *opened the oven , | he *jumped out | and *ran away . | "
     "a clever fox *offered to carry him across the river | because he *wanted to eat him .",
     [("action", "what did the gingerbread man do when the old woman opened the oven ?", "jumped out and ran away", False),
      ("causal", "why did the fox offer to carry him ?", "because the fox wanted to eat him", False)]),
    ("p17",
     "a fisherman *caught a magic fish . | the fish *begged to be set free , | so the fisherman *let it go . | "
     "his wife *was angry | and *sent him back to ask for a new house .",
     [("causal", "why did the fisherman let the fish go ?", "because it begged to be set free", False),
      ("action", "what did the fisherman 's wife do ?", "sent him back to ask for a new house", False)]),
    ("p18",
     "a witch *locked the girl in a high tower . | the girl *let down her long hair | so the witch could *climb up . | "
     "one day a prince *heard her singing | and *climbed the tower .",
     [("action", "what did the girl do so the witch could climb up ?", "let down her long hair", False),
      ("outcome", "what happened after the prince heard her singing ?", "he climbed the tower", False),
      ("setting", "where did the witch lock the girl ?", "in a high tower", False)]),
    ("p19",
     "two tricksters *promised the emperor magic clothes . | nobody *admitted they could not see the clothes | "
     "because they *were afraid . | when the emperor *walked through the town , | a child *shouted that he wore nothing .",
     [("causal", "why did nobody admit they could not see the clothes ?", "because they were afraid", False),
      ("outcome", "what happened when the emperor walked through the town ?", "a child shouted that he wore nothing", False),
      ("action", "what did the tricksters promise the emperor ?", "magic clothes", False)]),
    ("p20",
     "the children *dropped white stones on the path . | at night they *followed the stones | and *found their way home . | "
     "their stepmother *was angry | because they *came back .",
     [("action", "what did the children do at night ?", "followed the stones", False),
      ("outcome", "what happened after the children followed the stones ?", "they found their way home", False),
      ("causal", "why was the stepmother angry ?", "because they came back", False)]),
]


def parse_story(text):
    tokens, heads, labels, spans = [], [], [], []
    for unit in text.split("|"):
        words = unit.split()
        if not words:
            continue
        start = len(tokens)
        roots = [i for i, w in enumerate(words) if w.startswith("*")]
        if len(roots) != 1:
            raise SystemExit(f"unit needs exactly one root: {unit!r}")
        root = start + roots[0]
        for i, w in enumerate(words):
            w = w.lstrip("*")
            tokens.append(w)
            idx = start + i
            heads.append(idx if idx == root else root)
            if idx == root:
                labels.append("root")
            elif w in PUNCT:
                labels.append("punct")
            elif w in DETS:
                labels.append("det")
            else:
                labels.append("dep")
        spans.append([start, len(tokens)])
    edu_heads = [0] + list(range(len(spans) - 1))
    return tokens, heads, labels, spans, edu_heads


def main():
    out = sys.argv[1]
    with open(out, "w") as f:
        for pid, text, qas in STORIES:
            tokens, heads, labels, spans, edu_heads = parse_story(text)
            order = {}
            qa = []
            for qtype, q, a, multi in qas:
                order[qtype] = order.get(qtype, 0) + 1
                qa.append({"question": q.split(), "answer": a.split(), "qtype": qtype,
                           "order_index": order[qtype], "spans_multiple": multi})
            rec = {"id": pid, "split": "train", "tokens": tokens, "dep_heads": heads,
                   "dep_labels": labels, "edu_spans": spans, "edu_heads": edu_heads, "qa": qa}
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
