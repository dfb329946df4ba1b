#!/usr/bin/env python3
"""Regenerates the test fixtures under desk/ and distractor/.

Every evidence sentence is shaped so the lexical mock generator can answer
from it: the question's content words come first, the answer right after.
"""
import hashlib
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent
HERE = ROOT / "desk"

FILLER = [
    "Fog rolls in most mornings and burns off before noon.",
    "Local fishermen mend their nets along the quay in the evenings.",
    "The island council meets on the first Monday of each month.",
    "Gulls nest on the cliffs from April until late August.",
    "Tourists usually arrive on the afternoon boat from the mainland.",
    "A narrow gravel road links the harbour to the upland farms.",
    "Winter storms sometimes close the ferry route for several days.",
    "The old stone walls were rebuilt after the flood of 1871.",
]

# (doc_id, title, [sentences]); evidence sentences are referenced below by text.
DOCS = [
    ("d01", "Varn Point Lighthouse", [
        "The Varn Point lighthouse was designed by engineer Tomas Leid.",
        "Its lamp was first lit in the spring of 1864.",
        "The tower stands forty metres above the rocks.",
    ]),
    ("d02", "Keepers of Varn Point", [
        "Many visitors repeat the legend that the lighthouse keeper designed the tower himself.",
        "The last resident keeper of the lighthouse was Anna Brekk.",
        "She kept a logbook of every passing ship for thirty years.",
    ]),
    ("d03", "Orrin Harbour", [
        "Orrin harbour was dredged by the Caldera Works company.",
        "The breakwater at Orrin shelters forty fishing boats.",
        "A customs house opened on the harbour front in 1902.",
    ]),
    ("d04", "Caldera Works", [
        "Caldera Works was founded by the brothers Ivo and Mats Sand.",
        "The company later built the steel ferry Northern Gull.",
        "Its foundry closed during the long strike of 1931.",
    ]),
    ("d05", "The Northern Gull", [
        "Passengers between Orrin and Selby Quay travel on the ferry Northern Gull.",
        "Her maiden voyage took place in June 1925.",
        "The ferry can carry two hundred passengers in calm weather.",
    ]),
    ("d06", "Selby Quay", [
        "Selby Quay market sells smoked herring every Saturday.",
        "The quay clock tower was a gift from merchant Petra Lund.",
        "Cargo cranes were removed from the quay in 1968.",
    ]),
    ("d07", "Harbour Accord", [
        "The Harbour Accord was signed in Estmark at a winter conference.",
        "Delegates met in the capital Lorvik for nine days of talks.",
        "The accord fixed fishing boundaries for forty years.",
    ]),
    ("d08", "Estmark", [
        "Estmark is the largest of the northern provinces.",
        "Its capital Lorvik sits at the mouth of the river Tessa.",
        "Rye and barley are the main crops of the province.",
    ]),
    ("d09", "Tessa River", [
        "The Tessa river rises on the slopes of Mount Kael.",
        "Salmon run upstream in the autumn months.",
        "A stone bridge crosses the river at Lorvik.",
    ]),
    ("d10", "Mount Kael", [
        "Mount Kael was first climbed by surveyor Ilse Varga.",
        "The summit reaches 2310 metres.",
        "A weather station has stood near the summit since 1950.",
    ]),
    ("d11", "Kael Observatory", [
        "The Kael observatory telescope was ground by optician Henrik Moll.",
        "The dome rotates on iron wheels salvaged from a mill.",
        "Students visit the observatory on clear winter nights.",
    ]),
    ("d12", "Moll Optics", [
        "Henrik Moll trained as an apprentice in Brann.",
        "His workshop produced lenses for ships and lighthouses.",
        "The firm closed after his death in 1911.",
    ]),
    ("d13", "Brann", [
        "The Varga survey maps are held in the Brann university library.",
        "The city was rebuilt in brick after a fire in 1820.",
        "Brann hosts a spring fair for glassmakers.",
    ]),
    ("d14", "Island Railway", [
        "The island railway was opened by governor Clara Holt.",
        "The line ran from Orrin to the slate quarries at Dunmere.",
        "Passenger service ended in 1959.",
    ]),
    ("d15", "Dunmere Quarries", [
        "Dunmere slate was shipped to Brann for roofing.",
        "The quarries employed three hundred workers at their peak.",
        "Flooded pits now serve as swimming ponds.",
    ]),
    ("d16", "Holt Governorship", [
        "Governor Clara Holt also founded the island hospital.",
        "Her term lasted from 1880 to 1892.",
        "A statue of the governor stands outside the council hall.",
    ]),
    ("d17", "Island Hospital", [
        "The island hospital was staffed first by doctor Rune Aske.",
        "The west wing was added during the epidemic of 1918.",
        "Its garden grows herbs for the kitchen.",
    ]),
    ("d18", "Aske Family", [
        "Rune Aske was born on the neighbouring isle of Fenn.",
        "His daughter became the first woman to captain the Northern Gull.",
        "The family house is now a small museum.",
    ]),
    ("d19", "Isle of Fenn", [
        "Fenn is famous for its woollen shawls and ponies.",
        "The Fenn chapel bell was cast by founder Olga Stern.",
        "Only sixty people live on Fenn year round.",
    ]),
    ("d20", "Island Festivals", [
        "The midsummer regatta starts at Orrin harbour.",
        "The lantern festival in December honours lost sailors.",
        "Fiddlers from Fenn play at both festivals.",
    ]),
]

SENTINEL = "Insufficient information"

# (question, ground truth, [(doc_id, evidence sentence)])
QUESTIONS = [
    ("Who designed the Varn Point lighthouse?", "Tomas Leid", [("d01", 0)]),
    ("Who was the last resident keeper of the lighthouse?", "Anna Brekk", [("d02", 1)]),
    ("Who dredged Orrin harbour?", "Caldera Works", [("d03", 0)]),
    ("Who founded Caldera Works?", "Ivo and Mats Sand", [("d04", 0)]),
    ("Which ferry built by Caldera Works serves Orrin?", "Northern Gull", [("d04", 1), ("d05", 0)]),
    ("Which ferry carries passengers between Orrin and Selby Quay?", "Northern Gull", [("d05", 0)]),
    ("What does Selby Quay market sell?", "smoked herring", [("d06", 0)]),
    ("The quay clock tower was a gift from whom?", "Petra Lund", [("d06", 1)]),
    ("Where was the Harbour Accord signed?", "Lorvik", [("d07", 0), ("d07", 1)]),
    ("Which river flows past the capital Lorvik?", "Tessa", [("d08", 1)]),
    ("The Tessa river rises on which slopes?", "Mount Kael", [("d09", 0)]),
    ("Who first climbed Mount Kael?", "Ilse Varga", [("d10", 0)]),
    ("Who ground the Kael observatory telescope?", "Henrik Moll", [("d11", 0)]),
    ("Where did Henrik Moll train as an apprentice?", "Brann", [("d12", 0)]),
    ("Where are the Varga survey maps held?", "Brann university library", [("d13", 0)]),
    ("Who opened the island railway?", "Clara Holt", [("d14", 0)]),
    ("Where were the slate quarries served by the railway?", "Dunmere", [("d14", 1)]),
    ("Where was Dunmere slate shipped?", "Brann", [("d15", 0)]),
    ("What was founded by governor Clara Holt?", "island hospital", [("d16", 0)]),
    ("Who first staffed the island hospital?", "Rune Aske", [("d17", 0)]),
    ("On which isle was Rune Aske born?", "Fenn", [("d18", 0)]),
    ("Who cast the Fenn chapel bell?", "Olga Stern", [("d19", 0)]),
    ("The midsummer regatta starts where?", "Orrin harbour", [("d20", 0)]),
    ("Who first staffed the hospital founded by governor Clara Holt?", "Rune Aske",
     [("d16", 0), ("d17", 0)]),
    ("Where was the surveyor who first climbed Mount Kael honoured by a library?",
     "Brann university library", [("d10", 0), ("d13", 0)]),
    ("Which optician trained in Brann ground the Kael observatory telescope?", "Henrik Moll",
     [("d11", 0), ("d12", 0)]),
    ("Who dredged the harbour where the midsummer regatta starts?", "Caldera Works",
     [("d20", 0), ("d03", 0)]),
    ("What is the name of the mayor of Orrin in 2024?", SENTINEL, []),
    ("Which company built the Fenn chapel organ?", SENTINEL, []),
    ("What does the Varn Point keeper logbook record?", "every passing ship", [("d02", 2)]),
]


def make_desk():
    HERE.mkdir(parents=True, exist_ok=True)
    bodies = {}
    with open(HERE / "corpus.jsonl", "w", encoding="utf-8") as out:
        for i, (doc_id, title, sentences) in enumerate(DOCS):
            filler = [FILLER[(i + k) % len(FILLER)] for k in range(3)]
            body = " ".join(filler[:1] + sentences[:2] + filler[1:] + sentences[2:])
            bodies[doc_id] = sentences
            out.write(json.dumps({"doc_id": doc_id, "title": title, "body": body}) + "\n")
    with open(HERE / "questions.jsonl", "w", encoding="utf-8") as out:
        for i, (text, gt, evidence) in enumerate(QUESTIONS, start=1):
            ev = [{"doc_id": d, "sentence": bodies[d][s]} for d, s in evidence]
            out.write(json.dumps({"question_id": f"q{i:02d}", "text": text,
                                  "ground_truth": gt, "evidence": ev}) + "\n")

    providers = {"providers": [
        {"kind": "embed", "name": "lex-64", "mode": "mock_lexical", "dimension": 64},
        {"kind": "embed", "name": "lex-256", "mode": "mock_lexical", "dimension": 256},
        {"kind": "rerank", "name": "lex-rerank", "mode": "mock_lexical"},
        {"kind": "generate", "name": "lex-gen", "mode": "mock_lexical"},
        {"kind": "judge", "name": "judge", "mode": "mock_lexical",
         "specificity": {"Estmark": ["Lorvik"]}},
    ]}
    (HERE / "providers.json").write_text(json.dumps(providers, indent=2) + "\n")

    space = {
        "sweep_id": "desk",
        "judge_model": "judge",
        "space": {
            "embedding_model": ["lex-64", "lex-256"],
            "rerank_model": ["none", "lex-rerank"],
            "response_model": ["lex-gen"],
            "chunk_size": [160, 320],
            "chunk_overlap": [40],
            "retrieval_depth": [8],
            "top_k": [3],
        },
    }
    (HERE / "space.json").write_text(json.dumps(space, indent=2) + "\n")


def context_digest(chunk_ids):
    return hashlib.sha256("\n".join(chunk_ids).encode()).hexdigest()[:16]


def make_distractor():
    """One question whose scripted answer is wrong while a distractor chunk is
    in context and right once only the evidence chunk remains."""
    out_dir = ROOT / "distractor"
    out_dir.mkdir(parents=True, exist_ok=True)
    docs = [
        ("ev", "The Varn Point lighthouse was designed by engineer Tomas Leid."),
        ("dis", "Visitors claim the Varn Point lighthouse was designed by the keeper himself."),
        ("f1", "Gulls nest on the cliffs from April until late August."),
        ("f2", "The island council meets on the first Monday of each month."),
        ("f3", "Winter storms sometimes close the ferry route for several days."),
    ]
    with open(out_dir / "corpus.jsonl", "w", encoding="utf-8") as out:
        for doc_id, body in docs:
            out.write(json.dumps({"doc_id": doc_id, "body": body}) + "\n")
    question = {"question_id": "q1", "text": "Who designed the Varn Point lighthouse?",
                "ground_truth": "Tomas Leid", "evidence": [{"doc_id": "ev", "sentence": docs[0][1]}]}
    with open(out_dir / "questions.jsonl", "w", encoding="utf-8") as out:
        out.write(json.dumps(question) + "\n")

    wrong = {"supporting_sentences": [docs[1][1]], "final_answer": "the keeper"}
    right = {"supporting_sentences": [docs[0][1]], "final_answer": "Tomas Leid"}
    script = {
        "q1|*": json.dumps(wrong),
        "q1|" + context_digest(["ev:0"]): json.dumps(right),
    }
    (out_dir / "script.json").write_text(json.dumps(script, indent=2) + "\n")
    providers = {"providers": [
        {"kind": "embed", "name": "lex-64", "mode": "mock_lexical", "dimension": 64},
        {"kind": "generate", "name": "scripted", "mode": "mock_scripted", "fixture": "script.json"},
        {"kind": "judge", "name": "judge", "mode": "mock_lexical"},
    ]}
    (out_dir / "providers.json").write_text(json.dumps(providers, indent=2) + "\n")
    space = {
        "sweep_id": "distractor",
        "space": {
            "embedding_model": ["lex-64"],
            "rerank_model": ["none"],
            "response_model": ["scripted"],
            "chunk_size": [400],
            "chunk_overlap": [0],
            "retrieval_depth": [4],
            "top_k": [2],
        },
    }
    (out_dir / "space.json").write_text(json.dumps(space, indent=2) + "\n")


if __name__ == "__main__":
    make_desk()
    make_distractor()
