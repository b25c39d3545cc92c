import json
import math
import os
from pathlib import Path

import pytest

import csqe

SOURCE_DIR = Path(os.environ.get("CSQE_SOURCE_DIR", Path(__file__).resolve().parents[2]))
TOY = SOURCE_DIR / "data" / "toy"
GOLDEN = SOURCE_DIR / "tests" / "golden"


def toy_corpus():
    docs = []
    for line in (TOY / "corpus.jsonl").read_text().splitlines():
        d = json.loads(line)
        docs.append((d["id"], d["title"] + " " + d["contents"]))
    return docs


def test_tokenize():
    assert csqe.tokenize("Biology definition") == ["biologi", "definit"]
    assert csqe.tokenize("the of and") == []
    assert csqe.porter_stem("caresses") == "caress"


def test_index_search_and_rm3(tmp_path):
    ix = csqe.Index.build([("d1", "shark shark"), ("d2", "shark warm"), ("d3", "cold")])
    hits = ix.search("shark")
    assert [d for d, _ in hits] == ["d1", "d2"]
    assert ix.df("shark") == 2
    assert ix.idf("shark") == pytest.approx(math.log(1 + 1.5 / 2.5))

    weights = ix.rm3_expand("shark", fb_docs=2, fb_terms=2, orig_weight=0.5)
    assert set(weights) == {"shark", "warm"}
    assert sum(weights.values()) == pytest.approx(1.0)
    assert ix.rm3_expand("shark", fb_docs=2, fb_terms=2, orig_weight=1.0) == {"shark": 1.0}

    path = str(tmp_path / "toy.idx")
    ix.save(path)
    assert csqe.Index.load(path).search("shark") == hits

    with pytest.raises(csqe.DataError):
        csqe.Index.build([])
    with pytest.raises(csqe.ConfigError):
        ix.search("shark", 0)


def test_prompts_and_parser():
    docs = (GOLDEN / "shark_docs.txt").read_text().splitlines()
    prompt = csqe.build_csqe_prompt("how are some sharks warm blooded", docs)
    assert prompt.encode() == (GOLDEN / "csqe_prompt_shark.txt").read_bytes()
    assert csqe.build_keqe_prompt("q").endswith("Question: q\n\nPassage:")

    parsed = csqe.parse_csqe_response((GOLDEN / "csqe_worked_answer.txt").read_text(), 4)
    assert parsed["ordinals"] == [1, 3, 4]
    assert len(parsed["sentences"]) == 5
    assert csqe.verify_extraction(parsed["sentences"], docs) == pytest.approx(0.4)
    assert csqe.compose_expanded_query("q", ["a", "b"]) == "q q a b"


def test_toy_pipeline_beats_bm25():
    ix = csqe.Index.build(toy_corpus())
    backend = csqe.MockBackend.from_json((TOY / "fixtures.json").read_text())
    qrels = {}
    for line in (TOY / "qrels.txt").read_text().splitlines():
        qid, _, doc, grade = line.split()
        qrels.setdefault(qid, {})[doc] = int(grade)

    bm25, expanded = {}, {}
    for line in (TOY / "queries.tsv").read_text().splitlines():
        qid, text = line.split("\t")
        bm25[qid] = ix.search(text, 1000)
        expanded[qid] = csqe.csqe_pipeline(ix, text, backend)["hits"]

    base, _ = csqe.evaluate(bm25, qrels, "ndcg_cut.10")
    ours, per_query = csqe.evaluate(expanded, qrels, "ndcg_cut.10")
    assert ours["ndcg_cut.10"] > base["ndcg_cut.10"]
    assert len(per_query) == 5


def test_missing_fixture_raises():
    ix = csqe.Index.build([("a", "fish")])
    with pytest.raises(ValueError):
        csqe.keqe_pipeline(ix, "fish", csqe.MockBackend())
