#!/usr/bin/env python3
"""Freezes reference-scorer outputs (sacrebleu) into the JSON fixtures under tests/data.

Run once; the C++ tests only read the generated files.
"""
import json
import os

import sacrebleu
from sacrebleu.metrics import BLEU, CHRF
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "data")

TOKENIZER_INPUTS = [
    "Hello, world!",
    "",
    "a   b",
    "The price is $3.50, not 3,000.",
    "It's 10-15 km away (roughly).",
    "e-mail: foo@bar.com; see http://x.org/a?b=c&d=e",
    "Der Ausbruch begann am 1.5.2021 – sagte er.",
    "&quot;Quoted&quot; &amp; &lt;tagged&gt; text",
    "line one-\nline two\nthree",
    "ends with period.",
    ".leading dot and trailing comma,",
    "a.,b 1.,2 x,.y",
    "Größe: 5 m² {ok} [yes] ~tilde~ `tick` ^caret^ _under_ |pipe|",
    "numbers 1-2 a-b 3- -4",
    "<skipped> token <skipped>",
    "tab\tseparated nbsp　ideographic",
    "Über 90% der Fälle...",
    "„Anführungszeichen“ und «guillemets»",
    "don't won't O'Neil",
    "1,000,000.00 and 3.14159",
]

PAIRS = [
    ("the cat sat on the mat", "the cat sat on the mat"),
    ("a b c d", "a b c e"),
    ("The quick brown fox jumps over the lazy dog.", "A quick brown fox jumped over the lazy dog."),
    ("Der schnelle braune Fuchs springt.", "Der flinke braune Fuchs sprang."),
    ("Ausbruch", "Ausbruch"),
    ("xyz", "abc"),
    ("abcd", "abce"),
    ("ab", "abcdef"),
    ("abcdef", "ab"),
    ("Die Regierung hat am Montag neue Maßnahmen angekündigt.",
     "Am Montag kündigte die Regierung neue Maßnahmen an."),
    ("He said: \"It's over.\"", "He said, \"It is over.\""),
    ("In 2021, 3,000 people attended.", "3,000 people attended in 2021."),
    ("short", "a considerably longer reference sentence here"),
    ("Grüße aus München!", "Grüße aus Köln!"),
    ("one two three four five six seven", "one two three four five six seven eight"),
    ("to be or not to be", "to be or not to be that is the question"),
    ("Das ist gut.", "Das ist sehr gut."),
    ("x", "x y"),
    ("The meeting was postponed until next week due to illness.",
     "Due to illness, the meeting has been postponed to next week."),
    ("a a a a", "a a"),
]

CORPUS3 = (
    ["The cat is on the mat.", "There is a dog in the garden today.", "Er kam spät nach Hause."],
    ["The cat sat on the mat.", "A dog is in the garden.", "Er kam sehr spät nach Hause."],
)

# no 4-gram matches but all unigram/bigram/trigram matches present
NO4 = (["a b c x b c d"], ["a b c y b c d"])


def main():
    tok = Tokenizer13a()
    with open(os.path.join(OUT, "tok13a.jsonl"), "w", encoding="utf-8") as f:
        for s in TOKENIZER_INPUTS:
            f.write(json.dumps({"input": s, "tokens": tok(s).split()}, ensure_ascii=False) + "\n")

    bleu = BLEU(tokenize="13a", smooth_method="exp")
    sbleu = BLEU(tokenize="13a", smooth_method="add-k", smooth_value=1, effective_order=False)
    chrf = CHRF(char_order=6, word_order=0, beta=2, whitespace=False)
    with open(os.path.join(OUT, "metric_pairs.jsonl"), "w", encoding="utf-8") as f:
        for h, r in PAIRS:
            rec = {
                "hyp": h,
                "ref": r,
                "corpus_bleu": bleu.corpus_score([h], [[r]]).score,
                "sentence_chrf": chrf.sentence_score(h, [r]).score,
                "sentence_bleu_add1": sbleu.sentence_score(h, [r]).score,
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")

    hyps = [h for h, _ in PAIRS]
    refs = [r for _, r in PAIRS]
    corpora = {
        "pairs20": (hyps, refs),
        "corpus3": CORPUS3,
        "no4gram": NO4,
    }
    with open(os.path.join(OUT, "corpus_bleu.jsonl"), "w", encoding="utf-8") as f:
        for name, (h, r) in corpora.items():
            f.write(json.dumps({"name": name, "hyps": h, "refs": r,
                                "bleu": bleu.corpus_score(h, [r]).score,
                                "signature": str(bleu.get_signature())},
                               ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
