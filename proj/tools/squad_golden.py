"""Builds tests/fixtures/metric_golden.jsonl with the SQuAD v1.1 evaluation functions."""
import collections
import json
import re
import string
import sys


def normalize_answer(s):
    def remove_articles(text):
        return re.sub(r'\b(a|an|the)\b', ' ', text)

    def white_space_fix(text):
        return ' '.join(text.split())

    def remove_punc(text):
        exclude = set(string.punctuation)
        return ''.join(ch for ch in text if ch not in exclude)

    return white_space_fix(remove_articles(remove_punc(s.lower())))


def f1_score(prediction, ground_truth):
    prediction_tokens = normalize_answer(prediction).split()
    ground_truth_tokens = normalize_answer(ground_truth).split()
    common = collections.Counter(prediction_tokens) & collections.Counter(ground_truth_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0
    precision = 1.0 * num_same / len(prediction_tokens)
    recall = 1.0 * num_same / len(ground_truth_tokens)
    return (2 * precision * recall) / (precision + recall)


def exact_match_score(prediction, ground_truth):
    return normalize_answer(prediction) == normalize_answer(ground_truth)


def metric_max_over_ground_truths(metric_fn, prediction, ground_truths):
    return max(metric_fn(prediction, gt) for gt in ground_truths)


PAIRS = [
    ("November 2014", ["November 2014"]),
    ("november 2014", ["November 2014"]),
    ("November, 2014.", ["November 2014"]),
    ("in November 2014", ["November 2014"]),
    ("2014", ["November 2014"]),
    ("The Eiffel Tower", ["Eiffel Tower"]),
    ("an apple", ["the apple"]),
    ("A cat", ["cat", "a dog"]),
    ("the the end", ["the end"]),
    ("theater", ["the theater"]),
    ("Anne", ["an Anne"]),
    ("U.S.", ["US"]),
    ("U.S. Army", ["the US army"]),
    ("e-mail", ["email"]),
    ("e-mail system", ["the e-mail system", "mail"]),
    ("Denver Broncos", ["Denver Broncos", "The Denver Broncos", "Broncos"]),
    ("Carolina Panthers", ["Denver Broncos"]),
    ("Santa Clara, California", ["Santa Clara", "Levi's Stadium"]),
    ("Levis Stadium", ["Levi's Stadium"]),
    ("Levi 's Stadium", ["Levi's Stadium"]),
    ("$1.2 billion", ["1.2 billion dollars"]),
    ("1,000", ["1000"]),
    ("50%", ["50 percent"]),
    ("(1897)", ["1897"]),
    ("\"quoted text\"", ["quoted text"]),
    ("well-known", ["well known"]),
    ("New York City", ["New York"]),
    ("New York", ["New York City"]),
    ("York New", ["New York"]),
    ("a b c d", ["a b c d e f"]),
    ("b c", ["a b c"]),
    ("apple apple", ["apple"]),
    ("apple", ["apple apple"]),
    ("apple banana apple", ["banana apple banana"]),
    ("Mr. Smith", ["Smith"]),
    ("Dr. Martin Luther King, Jr.", ["Martin Luther King Jr."]),
    ("  spaced   out  ", ["spaced out"]),
    ("TAB\tseparated", ["tab separated"]),
    ("An", ["An American"]),
    ("the Beatles", ["The Beatles!"]),
    ("the answer", ["the answer is"]),
    ("answer.", ["answer!"]),
    ("#hashtag", ["hashtag"]),
    ("one-two-three", ["one two three"]),
    ("C++", ["C"]),
    ("Cáfe", ["Cafe"]),
    ("Beyoncé", ["Beyonce", "Beyoncé Knowles"]),
    ("Köln Cathedral", ["Cologne Cathedral", "köln cathedral"]),
    ("first and second", ["second and first", "first"]),
    ("seven", ["7", "seven days"]),
]


def main(out):
    assert len(PAIRS) == 50
    with open(out, "w", encoding="utf-8") as f:
        for pred, golds in PAIRS:
            # Pairs whose normalized forms are both empty are excluded on purpose.
            assert all(normalize_answer(pred).split() or normalize_answer(g).split() for g in golds)
            rec = {
                "prediction": pred,
                "golds": golds,
                "em": float(metric_max_over_ground_truths(exact_match_score, pred, golds)),
                "f1": float(metric_max_over_ground_truths(f1_score, pred, golds)),
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/metric_golden.jsonl")
