"""Cover-letter tailoring scores: TF-IDF vectors and cosine similarity.

A letter's tailoring score is the cosine similarity between its TF-IDF
vector and the job post's, fitted over one joint corpus of posts and
letters. Term frequency is the raw in-document count; inverse document
frequency is log(N / (1 + n_w)) clamped at zero so weights stay
non-negative and scores stay in [0, 1].
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import InputError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def load_stopwords() -> frozenset:
    """Bundled English stopword list (one lowercase term per line)."""
    text = resources.files("signalmarket.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@dataclass
class Document:
    doc_id: str
    raw_text: str
    tokens: list = field(default_factory=list)


def preprocess(raw_text: str, stopwords, doc_id: str = "") -> Document:
    """Lowercase, split on non-alphanumeric runs, drop stopwords and 1-char tokens."""
    tokens = [
        t
        for t in _TOKEN_RE.findall(raw_text.lower())
        if len(t) >= 2 and t not in stopwords
    ]
    return Document(doc_id=doc_id, raw_text=raw_text, tokens=tokens)


@dataclass
class TfidfModel:
    """Vocabulary, document frequencies and IDF weights over a corpus."""

    vocab: dict  # term -> index, lexicographic
    doc_freq: dict  # term -> number of documents containing it
    n_docs: int
    idf: dict  # term -> max(0, log(N / (1 + n_w)))

    def raw_idf(self, term: str) -> float:
        """Unclamped log(N / (1 + n_w)), kept for audit."""
        return math.log(self.n_docs / (1 + self.doc_freq[term]))


def fit_tfidf(corpus) -> TfidfModel:
    """Fit document frequencies and IDF over preprocessed documents."""
    corpus = list(corpus)
    if not corpus:
        raise InputError("cannot fit a TF-IDF model on an empty corpus")
    doc_freq: dict = {}
    for doc in corpus:
        for term in set(doc.tokens):
            doc_freq[term] = doc_freq.get(term, 0) + 1
    vocab = {term: i for i, term in enumerate(sorted(doc_freq))}
    n = len(corpus)
    idf = {term: max(0.0, math.log(n / (1 + df))) for term, df in doc_freq.items()}
    return TfidfModel(vocab=vocab, doc_freq=doc_freq, n_docs=n, idf=idf)


def vectorize(model: TfidfModel, doc: Document) -> dict:
    """Sparse weight vector {term index: count * idf}; unknown terms ignored."""
    counts: dict = {}
    for t in doc.tokens:
        if t in model.vocab:
            counts[t] = counts.get(t, 0) + 1
    return {model.vocab[t]: c * model.idf[t] for t, c in counts.items()}


def cosine_similarity(v_p: dict, v_b: dict) -> float:
    """Cosine of two sparse vectors; zero if either has zero norm."""
    np_ = math.sqrt(sum(w * w for w in v_p.values()))
    nb = math.sqrt(sum(w * w for w in v_b.values()))
    if np_ == 0.0 or nb == 0.0:
        return 0.0
    if len(v_p) > len(v_b):
        v_p, v_b = v_b, v_p
    dot = sum(w * v_b[i] for i, w in v_p.items() if i in v_b)
    return dot / (np_ * nb)


def tailoring_score(model: TfidfModel, job_text: str, letter_text: str, stopwords) -> float:
    """Cosine similarity between a job post and a cover letter."""
    v_job = vectorize(model, preprocess(job_text, stopwords))
    v_letter = vectorize(model, preprocess(letter_text, stopwords))
    return cosine_similarity(v_job, v_letter)


def read_tsv_records(path, n_fields: int):
    """Parse a line-delimited UTF-8 file of tab-separated fields.

    Blank lines are skipped; a row with the wrong field count raises
    InputError naming the line.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != n_fields:
                raise InputError(
                    f"{path}:{lineno}: expected {n_fields} tab-separated fields, got {len(parts)}"
                )
            records.append(parts)
    return records


def _read_jobs(path):
    """Jobs file: doc_id<TAB>text, optionally doc_id<TAB>skill<TAB>text."""
    jobs = {}
    skills = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) == 2:
                doc_id, text = parts
                skill = ""
            elif len(parts) == 3:
                doc_id, skill, text = parts
            else:
                raise InputError(f"{path}:{lineno}: expected 2 or 3 tab-separated fields")
            jobs[doc_id] = text
            skills[doc_id] = skill
    return jobs, skills


def score_dataset(jobs_file, letters_file, model_scope: str = "global", stopwords=None):
    """Score every letter against its referenced job.

    The letters file has rows bid_id<TAB>job_id<TAB>text. The IDF corpus is
    all job posts plus all letters, fitted jointly (per skill group when
    model_scope is "per_skill" and the jobs file carries a skill column).
    Returns (rows, errors): rows are (bid_id, job_id, score) in input
    order; a letter referencing an unknown job becomes an error record and
    processing continues.
    """
    if model_scope not in ("global", "per_skill"):
        raise InputError(f"model_scope must be 'global' or 'per_skill', got {model_scope!r}")
    if stopwords is None:
        stopwords = load_stopwords()
    jobs, skills = _read_jobs(jobs_file)
    letters = read_tsv_records(letters_file, 3)

    def group_of(job_id):
        if model_scope == "global":
            return ""
        return skills.get(job_id, "")

    groups: dict = {}
    for job_id, text in jobs.items():
        groups.setdefault(group_of(job_id), []).append(preprocess(text, stopwords, job_id))
    letter_docs = []
    for bid_id, job_id, text in letters:
        doc = preprocess(text, stopwords, bid_id)
        letter_docs.append((bid_id, job_id, doc))
        if job_id in jobs:
            groups.setdefault(group_of(job_id), []).append(doc)

    models = {g: fit_tfidf(docs) for g, docs in groups.items()}
    job_vectors = {}
    for g, docs in groups.items():
        for doc in docs:
            if doc.doc_id in jobs and doc.doc_id not in job_vectors:
                job_vectors[doc.doc_id] = vectorize(models[g], doc)

    rows, errors = [], []
    for bid_id, job_id, doc in letter_docs:
        if job_id not in jobs:
            errors.append((bid_id, job_id, "unknown job reference"))
            continue
        model = models[group_of(job_id)]
        score = cosine_similarity(job_vectors[job_id], vectorize(model, doc))
        rows.append((bid_id, job_id, score))
    return rows, errors


def write_scores_csv(path, rows) -> None:
    lines = ["bid_id,job_id,tailoring"]
    for bid_id, job_id, score in rows:
        lines.append(f"{bid_id},{job_id},{score:.10g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
