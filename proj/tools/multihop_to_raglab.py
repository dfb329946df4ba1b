#!/usr/bin/env python3
"""Convert MultiHop-RAG (corpus.json, MultiHopRAG.json) to raglab JSONL files."""
import argparse
import hashlib
import json
import os

SENTINEL = "Insufficient information"


def doc_id_for(url, title):
    return "mh-" + hashlib.sha256((url or title).encode("utf-8")).hexdigest()[:12]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", required=True, help="MultiHop-RAG corpus.json")
    ap.add_argument("--queries", required=True, help="MultiHopRAG.json")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--limit", type=int, default=0, help="keep only the first N queries")
    args = ap.parse_args()

    with open(args.corpus, encoding="utf-8") as f:
        articles = json.load(f)
    with open(args.queries, encoding="utf-8") as f:
        queries = json.load(f)
    if args.limit:
        queries = queries[: args.limit]

    by_url, by_title, seen = {}, {}, set()
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "corpus.jsonl"), "w", encoding="utf-8") as out:
        for a in articles:
            did = doc_id_for(a.get("url"), a.get("title", ""))
            if did in seen:
                continue
            seen.add(did)
            by_url[a.get("url")] = did
            by_title[a.get("title")] = did
            meta = {k: a[k] for k in ("author", "source", "category", "published_at", "url") if k in a}
            out.write(json.dumps({"doc_id": did, "title": a.get("title", ""), "body": a["body"],
                                  "metadata": meta}, ensure_ascii=False) + "\n")

    unmatched = 0
    with open(os.path.join(args.out, "questions.jsonl"), "w", encoding="utf-8") as out:
        for i, q in enumerate(queries):
            evidence = []
            for e in q.get("evidence_list", []):
                did = by_url.get(e.get("url")) or by_title.get(e.get("title"))
                if did is None:
                    unmatched += 1
                    did = ""  # matched corpus-wide
                evidence.append({"doc_id": did, "sentence": e["fact"]})
            answer = q["answer"]
            if q.get("question_type") == "null_query":
                answer, evidence = SENTINEL, []
            out.write(json.dumps({"question_id": "mh%05d" % i, "text": q["query"],
                                  "ground_truth": answer, "evidence": evidence},
                                 ensure_ascii=False) + "\n")
    print("docs=%d questions=%d unmatched_evidence=%d" % (len(seen), len(queries), unmatched))


if __name__ == "__main__":
    main()
