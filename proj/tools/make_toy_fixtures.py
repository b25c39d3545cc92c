#!/usr/bin/env python3
"""Regenerate the mock-backend fixtures for the bundled toy dataset.

The CSQE responses quote the key sentences of every judged-relevant document
that appears in the first-pass ranking, so the fixtures depend on the BM25
ranking and on the exact prompt bytes. Run this whenever either changes:

    PYTHONPATH=build/python python3 tools/make_toy_fixtures.py data/toy
"""

import argparse
import json
from pathlib import Path

import csqe

# Matches the CLI defaults.
K_FEEDBACK = 10
DOC_TOKENS = 128
N_CSQE = 2
N_KEQE = 5


def load_corpus(path):
    docs = []
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        text = d["contents"]
        if d.get("title"):
            text = d["title"] + " " + text
        docs.append((d["id"], text))
    return docs


def load_qrels(path):
    qrels = {}
    for line in path.read_text().splitlines():
        qid, _, docid, grade = line.split()
        qrels.setdefault(qid, {})[docid] = int(grade)
    return qrels


def csqe_response(first_pass, relevant, key_sentences, variant):
    blocks = []
    for n, docid in enumerate(first_pass, start=1):
        if relevant.get(docid, 0) < 1 or docid not in key_sentences:
            continue
        sentences = key_sentences[docid]
        if variant == 0:
            header = f"Document {n}:"
        else:
            # A second sample with markdown headers and only the lead sentence.
            header = f"**Document {n}:**"
            sentences = sentences[:1]
        blocks.append(header + "\n" + "\n".join(f'"{s}"' for s in sentences))
    return "\n\n".join(blocks)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("toy_dir", type=Path)
    args = ap.parse_args()

    docs = load_corpus(args.toy_dir / "corpus.jsonl")
    texts = dict(docs)
    index = csqe.Index.build(docs)
    qrels = load_qrels(args.toy_dir / "qrels.txt")
    spec = json.loads((args.toy_dir / "expansions.json").read_text())
    queries = [line.split("\t", 1) for line in (args.toy_dir / "queries.tsv").read_text().splitlines() if line]

    backend = csqe.MockBackend()
    for qid, text in queries:
        passages = spec["keqe_passages"][qid]
        assert len(passages) >= N_KEQE, qid
        keqe_prompt = csqe.build_keqe_prompt(text)
        for i, p in enumerate(passages[:N_KEQE]):
            backend.add(keqe_prompt, i, p)

        first_pass = [docid for docid, _ in index.search(text, K_FEEDBACK)]
        shown = [csqe.truncate_tokens(texts[d], DOC_TOKENS) for d in first_pass]
        prompt = csqe.build_csqe_prompt(text, shown)
        for variant in range(N_CSQE):
            backend.add(prompt, variant, csqe_response(first_pass, qrels.get(qid, {}), spec["key_sentences"], variant))

    out = args.toy_dir / "fixtures.json"
    fixtures = json.loads(backend.to_json())
    out.write_text(json.dumps(fixtures, indent=1, sort_keys=True, ensure_ascii=False) + "\n")
    print(f"wrote {len(fixtures)} fixtures to {out}")


if __name__ == "__main__":
    main()
