"""Builds the planted-entity fixture and traces the screening algorithm by hand.

Independent of the Rust code: bigram Jaccard, the slot graph, power
iteration, consistency, thresholding and aggregation are reimplemented here
from their definitions. Run from the repository root; writes the fixture
files and prints the frozen expectations used by the acceptance suite.
"""
import json
import re
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "planted"

ORGS = ["华能集团", "神华集团", "中石化公司", "兖矿集团", "同煤集团", "潞安集团", "晋能控股", "山东能源",
        "陕煤集团", "中煤能源", "淮北矿业", "平煤股份", "开滦集团", "阳泉煤业", "冀中能源", "皖北煤电",
        "龙煤集团", "徐矿集团", "伊泰集团", "大同煤矿"]
LOCS = ["北京", "太原", "济南", "西安", "大同", "长治", "郑州", "唐山", "阳泉", "邯郸", "合肥", "宿州",
        "鸡西", "徐州", "鄂尔多斯", "银川", "贵阳", "昆明", "兰州", "呼和浩特"]
PROS = ["甲醇", "焦炭", "原煤", "烯烃", "尿素", "合成氨", "乙二醇", "精煤", "煤焦油", "电力", "柴油",
        "石脑油", "硫磺", "苯", "液化气", "沥青", "甲烷", "氢气", "化肥", "水泥"]
TEMPLATES = ["{o}在{l}生产{p}。", "{o}位于{l}，主要产品是{p}。", "{l}的{o}扩大了{p}产能。"]

RELATIONS = [("production", "ORG", "PRO"), ("located_in", "ORG", "LOC")]
PHRASES = {"production": ["生产", "制造", "出产"], "located_in": ["位于", "坐落于", "设在"]}
SPURIOUS_PHRASE = {"production": "出产"}
SPURIOUS_SENTENCES = [0, 3, 6, 10, 13, 16]  # 6 of 20

BETA, LAMBDA, EPS, MAX_ITERS, THRESHOLD = 0.85, 1.0, 1e-6, 100, 0.035


def sentences():
    out = []
    for i, (o, l, p) in enumerate(zip(ORGS, LOCS, PROS)):
        text = TEMPLATES[i % 3].format(o=o, l=l, p=p)
        gold = []
        for surface, t in ((o, "ORG"), (l, "LOC"), (p, "PRO")):
            start = text.index(surface)
            gold.append({"surface": surface, "type": t, "start": start, "end": start + len(surface)})
        # Leftmost grounding must land on the planted span.
        assert len({g["start"] for g in gold}) == 3
        gold.sort(key=lambda g: (g["type"], g["start"], g["end"]))
        spurious = o[1] if i in SPURIOUS_SENTENCES else None
        if spurious:
            assert spurious not in (l, p) and text.index(spurious) == text.index(o) + 1
        out.append({"id": f"p{i:02d}", "text": text, "gold": gold, "org": o, "loc": l, "pro": p,
                    "spurious": spurious})
    return out


def bigrams(s):
    if len(s) < 2:
        return {s} if s else set()
    return {s[i:i + 2] for i in range(len(s) - 1)}


def jaccard(a, b):
    ga, gb = bigrams(a), bigrams(b)
    u = ga | gb
    return len(ga & gb) / len(u) if u else 0.0


def pagerank(nodes, edges):
    n = len(nodes)
    nbr = {v: set() for v in nodes}
    for a, b in edges:
        if a != b:
            nbr[a].add(b)
            nbr[b].add(a)
    r = {v: 1.0 / n for v in nodes}
    for _ in range(MAX_ITERS):
        new = {v: BETA * sum(r[k] / len(nbr[k]) for k in nbr[v]) + (1 - BETA) / n for v in nodes}
        delta = max(abs(new[v] - r[v]) for v in nodes)
        r = new
        if delta < EPS:
            break
    return r


def candidates(sent, relation, with_spurious, phrases):
    """Pairs emitted by the scripted mock for each phrase of one list."""
    head = sent["org"]
    tail = sent["pro"] if relation == "production" else sent["loc"]
    out = []
    for ph in phrases:
        pairs = [(head, tail)]
        if with_spurious and sent["spurious"] and SPURIOUS_PHRASE.get(relation) == ph:
            pairs.append((sent["spurious"], tail))
        out.append((ph, pairs))
    return out


def screen_list(sent, cands):
    nodes = sorted({(s, "S") for _, ps in cands for s, _ in ps} | {(o, "O") for _, ps in cands for _, o in ps})
    edges = [((s, "S"), (o, "O")) for _, ps in cands for s, o in ps]
    rel = pagerank(nodes, edges)
    score = {}
    for v in nodes:
        c = 0.0
        for ph, ps in cands:
            for s, o in ps:
                if (v[1] == "S" and s == v[0]) or (v[1] == "O" and o == v[0]):
                    c = max(c, jaccard(f"{s} {ph} {o}", sent["text"]))
        score[v] = (rel[v], c, LAMBDA * rel[v] * c)
    kept = [(s, o) for _, ps in cands for s, o in ps
            if score[(s, "S")][2] >= THRESHOLD and score[(o, "O")][2] >= THRESHOLD]
    return score, list(dict.fromkeys(kept))


def run(with_spurious, mode):
    preds = set()
    all_scores = {}
    for sent in SENTS:
        for name, head, tail in RELATIONS:
            phrases = [name] if mode == "no_relation_list" else [name] + PHRASES[name]
            cands = candidates(sent, name, with_spurious, phrases)
            if mode == "no_estimate":
                kept = list(dict.fromkeys(p for _, ps in cands for p in ps))
            else:
                score, kept = screen_list(sent, cands)
                all_scores[(sent["id"], name)] = score
            for s, o in kept:
                for surface, t in ((s, head), (o, tail)):
                    start = sent["text"].index(surface)
                    preds.add((sent["id"], t, start, start + len(surface)))
    gold = {(s["id"], g["type"], g["start"], g["end"]) for s in SENTS for g in s["gold"]}
    nm, np_, nr = len(gold & preds), len(preds), len(gold)
    p = nm / np_ if np_ else 0.0
    r = nm / nr if nr else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return (nm, np_, nr, p, r, f), all_scores


def mock_script(with_spurious):
    lines = []
    for name, head, tail in RELATIONS:
        numbered = "\n".join(f"{i + 1}. {ph}" for i, ph in enumerate(PHRASES[name]))
        lines.append({"match": "pattern", "key": re.escape(f'The relation "{name}" links'), "response": numbered})
    for sent in SENTS:
        tail_of = {"production": sent["pro"], "located_in": sent["loc"]}
        text = re.escape(sent["text"])
        if with_spurious and sent["spurious"]:
            for name, ph in SPURIOUS_PHRASE.items():
                pairs = [{"subject": sent["org"], "object": tail_of[name]},
                         {"subject": sent["spurious"], "object": tail_of[name]}]
                key = f'relation "{re.escape(ph)}"\\.[\\s\\S]*\\nText: {text}\\n'
                lines.append({"match": "pattern", "key": key, "response": json.dumps(pairs, ensure_ascii=False)})
        for name, _, _ in RELATIONS:
            alts = "|".join(re.escape(p) for p in [name] + PHRASES[name])
            key = f'relation "(?:{alts})"\\.[\\s\\S]*\\nText: {text}\\n'
            pairs = [{"subject": sent["org"], "object": tail_of[name]}]
            lines.append({"match": "pattern", "key": key, "response": json.dumps(pairs, ensure_ascii=False)})
    return lines


SENTS = sentences()

if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "corpus.jsonl", "w", encoding="utf-8") as f:
        for s in SENTS:
            f.write(json.dumps({"id": s["id"], "text": s["text"], "gold": s["gold"]}, ensure_ascii=False) + "\n")
    profile = {"profile_name": "planted", "schema": ["ORG", "LOC", "PRO"],
               "relations": [{"name": n, "head_type": h, "tail_type": t} for n, h, t in RELATIONS]}
    (OUT / "profile.json").write_text(json.dumps(profile, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    for name, spur in (("mock_clean.jsonl", False), ("mock_spurious.jsonl", True)):
        with open(OUT / name, "w", encoding="utf-8") as f:
            for line in mock_script(spur):
                f.write(json.dumps(line, ensure_ascii=False) + "\n")
    config = {"n_diverse": 3, "n_demos": 0, "score_threshold": THRESHOLD, "max_concurrency": 4}
    (OUT / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")

    for spur in (False, True):
        for mode in ("full", "no_relation_list", "no_estimate"):
            (nm, np_, nr, p, r, f), scores = run(spur, mode)
            print(f"spurious={spur} mode={mode}: Nm={nm} Np={np_} Nr={nr} P={p!r} R={r!r} F1={f!r}")
    _, scores = run(True, "full")
    for key in (("p00", "production"), ("p01", "production")):
        for slot, (rel, con, comb) in sorted(scores[key].items()):
            print(key, slot, repr(rel), repr(con), repr(comb))
    worst_gold = min(v[2] for sc in scores.values() for k, v in sc.items()
                     if not any(k[0] == s["spurious"] for s in SENTS))
    best_spur = max(v[2] for sc in scores.values() for k, v in sc.items()
                    if any(k[0] == s["spurious"] for s in SENTS))
    print("lowest gold slot score", worst_gold, "highest spurious slot score", best_spur)
