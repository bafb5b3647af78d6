"""Regenerates the fixture corpus. Output is deterministic.

    python3 generate.py
"""
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

# key: (raw id, canonical name, coarse type, fine types)
ENTITIES = {
    "losartan": ("D008784", "Losartan", "Chemical", ["angiotensin receptor blocker"]),
    "benazepril": ("C044946", "Benazepril", "Chemical", ["ace inhibitor"]),
    "amodiaquine": ("D000655", "Amodiaquine", "Chemical", ["antimalarial"]),
    "chloroquine": ("D002738", "Chloroquine", "Chemical", ["antimalarial"]),
    "hcq": ("D006886", "Hydroxychloroquine", "Chemical", ["antimalarial"]),
    "remdesivir": ("C000606551", "Remdesivir", "Chemical", ["antiviral"]),
    "dexamethasone": ("D003907", "Dexamethasone", "Chemical", []),
    "angiotensin2": ("D000804", "Angiotensin II", "Chemical", []),
    "tocilizumab": ("C502936", "Tocilizumab", "Chemical", []),
    "tp53": ("7157", "tumor protein p53", "Gene", []),
    "ace2": ("59272", "ACE2", "Gene", ["receptor"]),
    "ace": ("1636", "ACE", "Gene", []),
    "tmprss2": ("7113", "TMPRSS2", "Gene", ["protease"]),
    "il6": ("3569", "IL6", "Gene", ["cytokine"]),
    "tnf": ("7124", "TNF", "Gene", ["cytokine"]),
    "eif2ak2": ("5610", "EIF2AK2", "Gene", ["kinase"]),
    "ctsl": ("1514", "CTSL", "Gene", ["protease"]),
    "ctslp2": ("cathepsin L pseudogene 2", "cathepsin L pseudogene 2", "Gene", []),
    "agtr1": ("185", "AGTR1", "Gene", ["receptor"]),
    "lung_cancer": ("D008175", "lung cancer", "Disease", []),
    "covid": ("C000657245", "COVID-19", "Disease", []),
    "hypertension": ("D006973", "Hypertension", "Disease", []),
    "pneumonia": ("D011014", "Pneumonia", "Disease", []),
    "malaria": ("D008288", "Malaria", "Disease", []),
    "obesity": ("D009765", "Obesity", "Disease", []),
    "crs": ("D000080424", "Cytokine Release Syndrome", "Disease", []),
    "dili": ("D056486", "drug-induced liver injury", "Disease", []),
    "sars2": ("2697049", "SARS-CoV-2", "Organism", ["virus"]),
    "human": ("9606", "Homo sapiens", "Organism", []),
    "mouse": ("10090", "Mus musculus", "Organism", []),
    "hamster": ("10036", "Mesocricetus auratus", "Organism", []),
    "vero": ("Vero E6", "Vero E6", "Organism", ["cell_line"]),
    "calu3": ("Calu-3", "Calu-3", "Organism", ["cell_line"]),
}

CHEMICALS = ["losartan", "benazepril", "amodiaquine", "chloroquine", "hcq", "remdesivir",
             "dexamethasone", "angiotensin2", "tocilizumab"]
GENES = ["tp53", "ace2", "ace", "tmprss2", "il6", "tnf", "eif2ak2", "ctsl", "agtr1"]
DISEASES = ["covid", "hypertension", "pneumonia", "obesity", "crs", "lung_cancer"]
ORGANISMS = ["sars2", "human", "mouse", "hamster"]

AFFILIATIONS = ["University of Illinois at Urbana-Champaign", "Columbia University",
                "Tsinghua University", "University of Washington", "Mayo Clinic",
                "Institut Pasteur"]

PLAIN = [
    "Samples were collected from hospitalized patients.",
    "Statistical analysis used two-sided tests.",
    "All experiments were repeated three times.",
    "Data are reported as mean and standard deviation.",
    "The study protocol was approved by the ethics board.",
]


class Sentence:
    def __init__(self, section):
        self.section = section
        self.text = ""
        self.mentions = []
        self.relations = []
        self.events = []

    def add(self, *parts):
        """Strings are appended verbatim; (key, surface) tuples add mentions."""
        for p in parts:
            if isinstance(p, tuple):
                key, surface = p
                start = len(self.text)
                self.text += surface
                self.mentions.append((key, surface, start, len(self.text)))
            else:
                self.text += p
        return self

    def rel(self, src, dst, category, subtype, action):
        self.relations.append((src, dst, category, subtype, action))
        return self

    def event(self, event_type, trigger, roles):
        self.events.append((event_type, trigger, roles))
        return self


def e(key, surface=None):
    return (key, surface or ENTITIES[key][1])


def gc(s, chem, gene, subtype, action):
    return s.rel(chem, gene, "GeneChemical", subtype, action)


def random_sentence(rng, section):
    s = Sentence(section)
    kind = rng.randrange(10)
    c, c2 = rng.sample(CHEMICALS, 2)
    g, g2 = rng.sample(GENES, 2)
    d = rng.choice(DISEASES)
    o = rng.choice(ORGANISMS)
    if kind == 0:
        gc(s.add(e(c), " increases the expression of ", e(g), "."), c, g, "increases^expression", "Increase")
    elif kind == 1:
        gc(s.add(e(c), " decreases the activity of ", e(g), "."), c, g, "decreases^activity", "Decrease")
    elif kind == 2:
        s.add(e(g), " is a marker of ", e(d), ".").rel(g, d, "GeneDisease", "marker/mechanism", "Affect")
    elif kind == 3:
        s.add(e(c), " is used to treat ", e(d), ".").rel(c, d, "ChemicalDisease", "therapeutic", "Decrease")
    elif kind == 4:
        s.add("Levels of ", e(g), " were elevated in patients with ", e(d), ".")
        s.rel(g, d, "GeneDisease", "marker/mechanism", "Increase")
    elif kind == 5:
        s.add(e(o), " infection triggers phosphorylation of ", e(g), ".")
        s.event("Phosphorylation", "phosphorylation", {"Theme": g, "Cause": o})
    elif kind == 6:
        s.add(e(g), " binds ", e(g2), " in infected cells.")
        s.event("Binding", "binds", {"Theme": g, "Theme2": g2})
    elif kind == 7:
        s.add(e(c), " and ", e(c2), " were given together to ", e(o), " samples.")
    elif kind == 8:
        gc(s.add(e(c), " affects the binding of ", e(g), " to its receptor."), c, g, "affects^binding", "Affect")
    else:
        s.add(rng.choice(PLAIN))
    return s


def funding(rng, i):
    if rng.random() < 0.6:
        return "This work was supported by NIH grant R01-AI%06d." % (100000 + i)
    return "We thank the clinical staff for their help."


def bundle(paper_id, title_sentence, sentences, affiliations, ack, date):
    sents = [title_sentence] + sentences
    assert len(sents) == 10, (paper_id, len(sents))
    out = {
        "paper_id": paper_id,
        "title": title_sentence.text,
        "authors": ["A. Author", "B. Author"],
        "affiliations": affiliations,
        "acknowledgements": ack,
        "pub_date": date,
        "peer_reviewed": True,
        "sentences": [],
        "mentions": [],
        "relations": [],
        "events": [],
    }
    for idx, s in enumerate(sents):
        out["sentences"].append({"idx": idx, "section": s.section, "text": s.text})
        for key, surface, a, b in s.mentions:
            raw, name, coarse, fine = ENTITIES[key]
            stub = {"id": raw, "name": name, "coarse_type": coarse}
            if fine:
                stub["fine_types"] = fine
            if surface != name:
                stub["aliases"] = [surface]
            out["mentions"].append({"sentence_idx": idx, "char_span": [a, b], "entity": stub})
        for src, dst, cat, sub, act in s.relations:
            out["relations"].append({
                "src": ENTITIES[src][0], "dst": ENTITIES[dst][0], "category": cat,
                "subtype": sub, "action": act, "sentence_idx": idx,
            })
        for et, trig, roles in s.events:
            out["events"].append({
                "event_type": et, "trigger": trig,
                "roles": {r: ENTITIES[k][0] for r, k in roles.items()}, "sentence_idx": idx,
            })
    return out


def S(section):
    return Sentence(section)


def planted():
    """Hand-written papers carrying the facts the tests rely on."""
    papers = []

    body = [
        gc(S("Abstract").add(e("losartan"), " decreases the expression of ", e("tp53", "p53"),
                             " in lung epithelial cells."),
           "losartan", "tp53", "decreases^expression", "Decrease"),
        S("Abstract").add("Loss of ", e("tp53", "p53"), " is a marker of ", e("lung_cancer"), " progression.")
        .rel("tp53", "lung_cancer", "GeneDisease", "marker/mechanism", "Affect"),
        S("Body").add(e("losartan"), " was identified in a computational screen of approved drugs."),
        S("Body").add(e("losartan"), " reduced cytopathic effects in ", e("vero"), " cells infected with ",
                      e("sars2"), "."),
        S("Body").add(e("losartan"), " is used to treat ", e("hypertension"), ".")
        .rel("losartan", "hypertension", "ChemicalDisease", "therapeutic", "Decrease"),
        gc(S("Body").add(e("losartan"), " decreases the activity of ", e("agtr1"), "."),
           "losartan", "agtr1", "decreases^activity", "Decrease"),
        S("Body").add(PLAIN[0]),
        S("Caption").add("(A) ", e("losartan"), " docking pose. (B) Expression of ", e("ace2"),
                         " after treatment."),
        S("Acknowledgements").add("This work was supported by NIH grant R01-AI000001."),
    ]
    papers.append(bundle(
        "doc_losartan",
        S("Title").add(e("losartan"), " and ", e("tp53"), " in ", e("lung_cancer")),
        body,
        ["University of Illinois at Urbana-Champaign", "Columbia University"],
        "This work was supported by NIH grant R01-AI000001. We thank the reviewers.",
        "2020-05-04",
    ))

    body = [
        gc(S("Abstract").add(e("losartan"), " decreases the expression of ", e("tp53", "TP53"),
                             " in alveolar cells."),
           "losartan", "tp53", "decreases^expression", "Decrease"),
        S("Abstract").add(e("tp53", "TP53"), " mutations are a marker of ", e("lung_cancer"), ".")
        .rel("tp53", "lung_cancer", "GeneDisease", "marker/mechanism", "Affect"),
        S("Body").add(e("mouse", "Mice"), " treated with ", e("losartan"), " showed reduced lung injury."),
        S("Body").add("A phase 2 trial of ", e("losartan"), " enrolled ", e("covid"), " patients."),
        S("Body").add(e("angiotensin2"), " increases the activity of ", e("agtr1"), ".")
        .rel("angiotensin2", "agtr1", "GeneChemical", "increases^activity", "Increase"),
        S("Body").add(e("tnf"), " is a marker of ", e("obesity"), ".")
        .rel("tnf", "obesity", "GeneDisease", "marker/mechanism", "Decrease"),
        S("Body").add(PLAIN[1]),
        S("Caption").add("Survival of ", e("mouse", "mice"), " treated with ", e("losartan"), "."),
        S("Acknowledgements").add("Funding was provided by the Mayo Foundation award 77."),
    ]
    papers.append(bundle(
        "paper02",
        S("Title").add(e("losartan"), " in ", e("covid"), " lung injury"),
        body,
        ["Columbia University", "Mayo Clinic"],
        "Funding was provided by the Mayo Foundation award 77.",
        "2020-06-11",
    ))

    body = [
        S("Abstract").add(e("benazepril"), " is used to treat ", e("hypertension"), ".")
        .rel("benazepril", "hypertension", "ChemicalDisease", "therapeutic", "Decrease"),
        gc(S("Abstract").add(e("benazepril"), " decreases the activity of ", e("ace"), "."),
           "benazepril", "ace", "decreases^activity", "Decrease"),
        gc(S("Body").add(e("benazepril"), " increases the expression of ", e("ace2"), " in kidney cells."),
           "benazepril", "ace2", "increases^expression", "Increase"),
        S("Body").add(e("benazepril"), " was selected by manual screen of antihypertensive drugs."),
        S("Body").add("An observational trial followed ", e("benazepril"), " users with ", e("covid"), "."),
        S("Body").add(e("tnf"), " is a marker of ", e("obesity"), ".")
        .rel("tnf", "obesity", "GeneDisease", "marker/mechanism", "Decrease"),
        S("Body").add(PLAIN[2]),
        S("Caption").add("(A) Blood pressure. (B) ", e("ace2"), " levels."),
        S("Acknowledgements").add("We thank the clinical staff for their help."),
    ]
    papers.append(bundle(
        "paper03",
        S("Title").add(e("benazepril"), " and ", e("ace2"), " expression"),
        body,
        ["Tsinghua University"],
        "We thank the clinical staff for their help.",
        "2020-07-01",
    ))

    body = [
        S("Abstract").add(e("amodiaquine"), " is used to treat ", e("malaria"), ".")
        .rel("amodiaquine", "malaria", "ChemicalDisease", "therapeutic", "Decrease"),
        S("Abstract").add(e("amodiaquine"), " may cause ", e("dili"), " in some patients.")
        .rel("amodiaquine", "dili", "ChemicalDisease", "marker/mechanism", "Increase"),
        S("Body").add(e("amodiaquine"), " inhibited ", e("sars2"), " replication in ", e("calu3"),
                      " cells in a plaque assay."),
        gc(S("Body").add(e("amodiaquine"), " decreases the activity of ", e("ctsl"), "."),
           "amodiaquine", "ctsl", "decreases^activity", "Decrease"),
        S("Body").add(e("hamster", "Hamsters"), " given ", e("amodiaquine"), " had lower viral loads."),
        gc(S("Body").add(e("chloroquine"), " increases the expression of ", e("tp53", "p53"), "."),
           "chloroquine", "tp53", "increases^expression", "Increase"),
        gc(S("Body").add(e("chloroquine"), " decreases the expression of ", e("ctslp2"), "."),
           "chloroquine", "ctslp2", "decreases^expression", "Decrease"),
        S("Caption").add(e("amodiaquine"), " dose response curve."),
        S("Acknowledgements").add("Supported by Institut Pasteur funding."),
    ]
    papers.append(bundle(
        "paper04",
        S("Title").add(e("amodiaquine"), " against ", e("sars2")),
        body,
        ["Institut Pasteur", "University of Washington"],
        "Supported by Institut Pasteur funding.",
        "2020-08-15",
    ))

    body = [
        S("Abstract").add("Phosphorylation of ", e("eif2ak2"), " is induced by ", e("sars2"), " infection.")
        .event("Phosphorylation", "Phosphorylation", {"Theme": "eif2ak2", "Cause": "sars2"}),
        S("Abstract").add(e("eif2ak2"), " phosphorylation was seen in ", e("calu3"), " cells.")
        .event("Phosphorylation", "phosphorylation", {"Theme": "eif2ak2"}),
        S("Body").add(e("tnf"), " phosphorylation rose after infection.")
        .event("Phosphorylation", "phosphorylation", {"Theme": "tnf"}),
        S("Body").add(e("eif2ak2"), " binds double-stranded RNA.")
        .event("Binding", "binds", {"Theme": "eif2ak2"}),
        S("Body").add("Levels of ", e("il6"), " were elevated in patients with ", e("crs"), ".")
        .rel("il6", "crs", "GeneDisease", "marker/mechanism", "Increase"),
        S("Body").add(e("tocilizumab"), " is used to treat ", e("crs"), ".")
        .rel("tocilizumab", "crs", "ChemicalDisease", "therapeutic", "Decrease"),
        S("Body").add(PLAIN[3]),
        S("Caption").add("(A) ", e("eif2ak2"), " blot. (B) Quantification."),
        S("Acknowledgements").add("We thank the clinical staff for their help."),
    ]
    papers.append(bundle(
        "paper05",
        S("Title").add(e("eif2ak2"), " activation by ", e("sars2")),
        body,
        ["University of Washington"],
        "We thank the clinical staff for their help.",
        "2020-09-09",
    ))
    return papers


def generated(rng):
    papers = []
    for i in range(6, 21):
        g = rng.choice(GENES)
        d = rng.choice(DISEASES)
        title = S("Title").add(e(g), " in ", e(d))
        body = [random_sentence(rng, "Abstract" if k < 2 else "Body") for k in range(7)]
        cap = S("Caption").add("(A) ", e(rng.choice(GENES)), " staining. (B) ", e(rng.choice(CHEMICALS)),
                               " treatment.")
        ack_text = funding(rng, i)
        body += [cap, S("Acknowledgements").add(ack_text)]
        papers.append(bundle(
            "paper%02d" % i, title, body,
            sorted(rng.sample(AFFILIATIONS, rng.randint(1, 2))),
            ack_text,
            "2020-%02d-%02d" % (rng.randint(1, 12), rng.randint(1, 28)),
        ))
    return papers


def write(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)
        f.write("\n")


def main():
    rng = random.Random(20200601)
    corpus = os.path.join(HERE, "corpus")
    os.makedirs(corpus, exist_ok=True)
    papers = planted() + generated(rng)
    for p in papers:
        write(os.path.join(corpus, p["paper_id"] + ".json"), p)

    # paper07 with its first relation's subtype changed, for update tests.
    update = os.path.join(HERE, "update")
    os.makedirs(update, exist_ok=True)
    p7 = json.loads(json.dumps(next(p for p in papers if p["paper_id"] == "paper07")))
    if p7["relations"]:
        r = p7["relations"][0]
        r["subtype"] = "inferred" if r["subtype"] != "inferred" else "therapeutic"
    write(os.path.join(update, "paper07_v2.json"), p7)


if __name__ == "__main__":
    main()
