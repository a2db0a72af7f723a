"""Regenerates the toy fixtures under tests/fixtures. Output is deterministic."""

import base64
import hashlib
import json
import string
import struct
from pathlib import Path

HERE = Path(__file__).resolve().parent
DIM = 4

CHEXPERT14 = [
    "Enlarged Cardiomediastinum", "Cardiomegaly", "Lung Opacity", "Lung Lesion", "Edema",
    "Consolidation", "Pneumonia", "Atelectasis", "Pneumothorax", "Pleural Effusion",
    "Pleural Other", "Fracture", "Support Devices", "No Finding",
]


def tokenize(text):
    out = []
    for raw in text.lower().split():
        tok = raw.strip(string.punctuation)
        if tok:
            out.append(tok)
    return out


def token_vector(token):
    digest = hashlib.sha256(token.encode()).digest()
    vals = [((b / 255.0) * 2.0 - 1.0) for b in digest[:DIM]]
    if all(v == 0 for v in vals):
        vals[0] = 1.0
    return vals


def pack(rows):
    flat = [v for row in rows for v in row]
    return base64.b64encode(struct.pack("<%df" % len(flat), *flat)).decode()


def dump(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, sort_keys=True) + "\n")


STUDIES = {
    "findings": {
        "s1": "Heart size is normal. Small left pleural effusion, increased since prior.",
        "s2": "No pneumothorax. Mild pulmonary edema, improved.",
        "s3": "Stable cardiomegaly. No focal consolidation.",
    },
    "impression": {
        "s1": "Small left pleural effusion, worsened.",
        "s2": "Improving edema.",
        "s3": "Stable cardiomegaly.",
    },
}

CANDIDATES = {
    "findings": {
        ("s1", "sysA"): "Heart size is normal. Small left pleural effusion, increased.",
        ("s1", "sysB"): "Normal heart. No effusion.",
        ("s1", "sysC"): "Large right pneumothorax, new.",
        ("s2", "sysA"): "No pneumothorax. Mild pulmonary edema, improved.",
        ("s2", "sysB"): "Mild edema.",
        ("s2", "sysC"): "Cardiomegaly with consolidation.",
        ("s3", "sysA"): "Stable cardiomegaly. No consolidation.",
        ("s3", "sysB"): "Cardiomegaly, unchanged.",
        ("s3", "sysC"): "Normal chest.",
    },
    "impression": {
        ("s1", "sysA"): "Small left pleural effusion, worsened.",
        ("s1", "sysB"): "Pleural effusion.",
        ("s1", "sysC"): "No acute process.",
        ("s2", "sysA"): "Improving edema.",
        ("s2", "sysB"): "Edema.",
        ("s2", "sysC"): "Pneumonia, new.",
        ("s3", "sysA"): "Stable cardiomegaly.",
        ("s3", "sysB"): "Cardiomegaly.",
        ("s3", "sysC"): "Fracture.",
    },
}

KEYWORD_LABELS = {
    "effusion": "Pleural Effusion", "pneumothorax": "Pneumothorax", "edema": "Edema",
    "cardiomegaly": "Cardiomegaly", "consolidation": "Consolidation", "pneumonia": "Pneumonia",
    "fracture": "Fracture",
}

# Expert error counts (significant, insignificant) per candidate, findings and impression.
ERRORS = {"sysA": (0, 0), "sysB": (1, 1), "sysC": (3, 0)}


def labels_for(text):
    toks = tokenize(text)
    negated = "no" in toks
    labels = {name: "blank" for name in CHEXPERT14}
    found = False
    for kw, name in KEYWORD_LABELS.items():
        if kw in toks:
            labels[name] = "negative" if negated and toks.index("no") < toks.index(kw) else "positive"
            found = found or labels[name] == "positive"
    if "mild" in toks and "edema" in toks:
        labels["Edema"] = "uncertain" if "improved" not in toks else "positive"
    labels["No Finding"] = "negative" if found else "positive"
    return labels


def graph_for(text):
    toks = tokenize(text)
    entities = []
    relations = []
    anat = None
    for i, t in enumerate(toks):
        if t in ("left", "right", "heart", "pulmonary", "pleural"):
            anat = "e%d" % len(entities)
            entities.append({"id": anat, "tokens": [t], "type": "ANAT"})
        elif t in KEYWORD_LABELS or t in ("normal",):
            eid = "e%d" % len(entities)
            entities.append({"id": eid, "tokens": [t], "type": "OBS"})
            if anat is not None:
                relations.append({"head": eid, "tail": anat, "type": "located_at"})
    return entities, relations


def toy():
    out = HERE / "toy"
    out.mkdir(exist_ok=True)
    for section in ("findings", "impression"):
        studies = [
            {"study_id": sid, "section": section, "reference_text": text, "source_dataset": "toy"}
            for sid, text in STUDIES[section].items()
        ]
        cands = [
            {"study_id": sid, "system_id": sys, "text": text}
            for (sid, sys), text in CANDIDATES[section].items()
        ]
        dump(out / f"{section}_studies.jsonl", studies)
        dump(out / f"{section}_candidates.jsonl", cands)

        texts = [((s["study_id"], "REF"), s["reference_text"]) for s in studies]
        texts += [((c["study_id"], c["system_id"]), c["text"]) for c in cands]

        tok_records = []
        rep_records = []
        radeval_records = []
        for (sid, sys), text in texts:
            toks = tokenize(text)
            rows = [token_vector(t) for t in toks]
            tok_records.append({"study_id": sid, "system_id": sys, "tokens": toks, "data": pack(rows)})
            shifted = [[v + 0.25 for v in r] for r in rows]
            radeval_records.append({"study_id": sid, "system_id": sys, "tokens": toks, "data": pack(shifted)})
            mean = [sum(r[d] for r in rows) / len(rows) for d in range(DIM)]
            rep_records.append({"study_id": sid, "system_id": sys, "data": pack([mean])})
        for name, records, kind in (
            ("token_embeddings", tok_records, "token"),
            ("radeval_token_embeddings", radeval_records, "token"),
            ("report_embeddings", rep_records, "report"),
        ):
            header = {"format_version": 1, "kind": kind, "dim": DIM, "record_count": len(records)}
            dump(out / f"{section}_{name}.jsonl", [header] + records)

        dump(out / f"{section}_chexpert_labels.jsonl", [
            {"study_id": sid, "system_id": sys, "schema": "chexpert14", "labels": labels_for(text)}
            for (sid, sys), text in texts
        ])
        graphs = []
        for (sid, sys), text in texts:
            ents, rels = graph_for(text)
            graphs.append({"study_id": sid, "system_id": sys, "entities": ents, "relations": rels})
        dump(out / f"{section}_graphs.jsonl", graphs)
        judge = []
        for c in cands:
            sig, _ = ERRORS[c["system_id"]]
            judge.append({"study_id": c["study_id"], "system_id": c["system_id"],
                          "scores": {"green": round(1.0 / (1 + sig), 6)}})
        dump(out / f"{section}_judge_scores.jsonl", judge)

    annotations = []
    for section in ("findings", "impression"):
        for (sid, sys) in CANDIDATES[section]:
            sig, insig = ERRORS[sys]
            # vary counts by study so the totals are not constant within systems
            extra = {"s1": 0, "s2": 1, "s3": 0}[sid] if sys == "sysC" else 0
            counts = {
                "false_prediction": {"significant": sig + extra, "insignificant": 0},
                "omission": {"significant": 0, "insignificant": insig},
            }
            annotations.append({"study_id": sid, "system_id": sys, "section": section, "counts": counts,
                                "total_significant": sig + extra})
    dump(out / "annotations.jsonl", annotations)


def retrieval():
    out = HERE / "retrieval"
    out.mkdir(exist_ok=True)
    records = []
    labels = []
    for label, vec in (("Edema", [1.0, 0.0, 0.0, 0.0]), ("Pneumothorax", [0.0, 1.0, 0.0, 0.0])):
        for i in range(15):
            sid = f"{label.lower()}{i:02d}"
            records.append({"study_id": sid, "system_id": "REF", "data": pack([[v * (1 + i) for v in vec]])})
            labels.append({"study_id": sid, "system_id": "REF", "schema": "custom",
                           "labels": {"Edema": "positive" if label == "Edema" else "negative",
                                      "Pneumothorax": "positive" if label == "Pneumothorax" else "negative"}})
    header = {"format_version": 1, "kind": "report", "dim": DIM, "record_count": len(records)}
    dump(out / "report_embeddings.jsonl", [header] + records)
    dump(out / "labels.jsonl", labels)


if __name__ == "__main__":
    toy()
    retrieval()
