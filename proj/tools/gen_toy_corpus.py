#!/usr/bin/env python3
"""Writes the toy fixture under data/toy.

Three classes, each with a signature verb-object pair. Every document has a
signature sentence and some class-neutral filler, so the right rules exist
but have to be found among distractors. Candidates carry 20% label noise.
"""
import argparse
import json
import random
from pathlib import Path

CLASSES = {
    "cooking": [("bake", ["bakes", "baked", "bake"], ["bread", "cake", "pie"]),
                ("stir", ["stirs", "stirred"], ["soup", "sauce"])],
    "sports": [("kick", ["kicks", "kicked", "kick"], ["ball", "goal"]),
               ("throw", ["throws", "threw"], ["javelin", "discus"])],
    "music": [("play", ["plays", "played", "play"], ["guitar", "piano", "drum"]),
              ("sing", ["sings", "sang"], ["song", "anthem"])],
}
SUBJECTS = ["chef", "player", "girl", "boy", "teacher", "friend", "uncle", "neighbor"]
ADJS = ["big", "old", "new", "red", "small"]
FILLER_VERBS = [("see", ["sees", "saw"]), ("like", ["likes", "liked"]), ("visit", ["visits", "visited"])]
FILLER_OBJS = ["park", "house", "city", "garden", "river"]


def plural(noun, rng):
    return noun + "s" if rng.random() < 0.3 else noun


def sentence(rng, verb_forms, verb_lemma, objs, with_adj):
    subj = rng.choice(SUBJECTS)
    obj = rng.choice(objs)
    obj_form = plural(obj, rng)
    rows = [("the", "the", "DET", 2, "det"),
            (subj, subj, "NOUN", 3, "nsubj"),
            (rng.choice(verb_forms), verb_lemma, "VERB", 0, "root"),
            ("the", "the", "DET", 6 if with_adj else 5, "det")]
    if with_adj:
        adj = rng.choice(ADJS)
        rows.append((adj, adj, "ADJ", 6, "amod"))
        rows.append((obj_form, obj, "NOUN", 3, "obj"))
    else:
        rows.append((obj_form, obj, "NOUN", 3, "obj"))
    rows.append((".", ".", "PUNCT", 3, "punct"))
    return rows


def doc_sentences(rng, label):
    lemma, forms, objs = rng.choice(CLASSES[label])
    sents = [sentence(rng, forms, lemma, objs, rng.random() < 0.5)]
    if rng.random() < 0.6:
        flemma, fforms = rng.choice(FILLER_VERBS)
        sents.append(sentence(rng, fforms, flemma, FILLER_OBJS, rng.random() < 0.5))
    return sents


def conllu(sent_id, rows):
    out = [f"# sent_id = {sent_id}",
           "# text = " + " ".join(r[0] for r in rows)]
    for i, (form, lemma, upos, head, rel) in enumerate(rows, 1):
        out.append(f"{i}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_")
    return "\n".join(out) + "\n"


def make_docs(rng, prefix, per_class):
    docs = []
    for label in sorted(CLASSES):
        for n in range(per_class):
            docs.append((f"{prefix}-{label}-{n:03d}", label, doc_sentences(rng, label)))
    rng.shuffle(docs)
    return docs


def write_split(path, docs):
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "docs.jsonl", "w") as jf, open(path / "parses.conllu", "w") as cf:
        for doc_id, label, sents in docs:
            ids = [f"{doc_id}-s{k}" for k in range(len(sents))]
            jf.write(json.dumps({"doc_id": doc_id, "label": label, "sent_ids": ids}) + "\n")
            for sid, rows in zip(ids, sents):
                cf.write(conllu(sid, rows) + "\n")


def write_candidates(path, docs, rng, noise):
    labels = sorted(CLASSES)
    with open(path, "w") as f:
        for doc_id, label, sents in docs:
            claimed = label
            if rng.random() < noise:
                claimed = rng.choice([l for l in labels if l != label])
            text = "".join(conllu(f"{doc_id}-s{k}", rows) + "\n" for k, rows in enumerate(sents))
            f.write(json.dumps({"doc_id": doc_id, "label": claimed, "gold": label, "conllu": text}) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "toy"))
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out)
    write_split(out / "seed", make_docs(rng, "seed", 10))
    write_split(out / "validation", make_docs(rng, "val", 5))
    write_candidates(out / "candidates.jsonl", make_docs(rng, "gen", 15), rng, 0.2)
    config = {
        "seed": {"docs": "seed/docs.jsonl", "parses": "seed/parses.conllu"},
        "validation": {"mode": "split", "docs": "validation/docs.jsonl", "parses": "validation/parses.conllu"},
        "generator": {"mode": "file", "path": "candidates.jsonl", "paraphrase_morphing": True},
        "iterations": 2,
        "filtering": {"lambda": 0.5, "budget": 20},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    few_shot = dict(config)
    few_shot["validation"] = {"mode": "few_shot"}
    (out / "config_few_shot.json").write_text(json.dumps(few_shot, indent=2) + "\n")


if __name__ == "__main__":
    main()
