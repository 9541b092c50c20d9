"""Per-tag binary text classifiers: TF-IDF vectorization, four shallow
model families, grid search, forest purification, and portable model
serialization.

Model fitting is delegated to scikit-learn, but the fitted parameters are
immediately extracted into plain-array predictors; those predictors are
the model of record (used for metrics, classification and serialization),
so a saved model round-trips to bit-identical predictions.
"""

from __future__ import annotations

import contextlib
import itertools
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from sklearn.ensemble import RandomForestClassifier
from sklearn.linear_model import LogisticRegression, SGDClassifier
from sklearn.model_selection import StratifiedKFold, train_test_split
from sklearn.naive_bayes import MultinomialNB

from .extrapolation import TrainingSet
from .kernels import sentence_hits
from .provenance import sha256_text

FORMAT_VERSION = 1

FAMILIES = ("naive-bayes", "logistic-regression", "sgd-svm", "random-forest")
FAMILY_CODES = {
    "naive-bayes": "nb",
    "logistic-regression": "logreg",
    "sgd-svm": "sgd",
    "random-forest": "rf",
}
CODE_FAMILIES = {v: k for k, v in FAMILY_CODES.items()}

DEFAULT_GRIDS = {
    "naive-bayes": {"alpha": [0.5, 1.0]},
    "logistic-regression": {"C": [0.1, 1.0, 10.0]},
    "sgd-svm": {"alpha": [1e-4, 1e-3]},
    "random-forest": {"n_estimators": [50, 100, 200], "max_depth": [8, 16, None]},
}


class LearningError(Exception):
    pass


# --- TF-IDF -------------------------------------------------------------------


@dataclass
class Vectorizer:
    """Bag-of-words TF-IDF: raw term counts, smoothed idf
    ln((1+n)/(1+df)) + 1, L2-normalized rows."""

    vocabulary: dict
    idf: np.ndarray
    fitted_on: str = ""  # content hash of the fitting corpus

    @classmethod
    def fit(cls, chunks):
        if not any(c.split() for c in chunks):
            raise LearningError("cannot fit vectorizer on an all-empty corpus")
        df = {}
        for chunk in chunks:
            for tok in set(chunk.split()):
                df[tok] = df.get(tok, 0) + 1
        vocabulary = {tok: i for i, tok in enumerate(sorted(df))}
        n = len(chunks)
        idf = np.empty(len(vocabulary))
        for tok, i in vocabulary.items():
            idf[i] = math.log((1 + n) / (1 + df[tok])) + 1.0
        return cls(vocabulary=vocabulary, idf=idf, fitted_on=sha256_text("\n".join(chunks)))

    def transform(self, chunks):
        indptr = [0]
        indices = []
        data = []
        vocab = self.vocabulary
        for chunk in chunks:
            counts = {}
            for tok in chunk.split():
                col = vocab.get(tok)
                if col is not None:
                    counts[col] = counts.get(col, 0) + 1
            for col in sorted(counts):
                indices.append(col)
                data.append(counts[col] * self.idf[col])
            indptr.append(len(indices))
        X = sp.csr_matrix(
            (np.array(data, dtype=np.float64), indices, indptr),
            shape=(len(chunks), len(vocab)),
        )
        norms = np.sqrt(X.multiply(X).sum(axis=1)).A1
        norms[norms == 0] = 1.0
        return sp.diags(1.0 / norms) @ X

    def to_dict(self):
        return {
            "vocabulary": self.vocabulary,
            "idf": self.idf.tolist(),
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            vocabulary={k: int(v) for k, v in d["vocabulary"].items()},
            idf=np.array(d["idf"], dtype=np.float64),
            fitted_on=d.get("fitted_on", ""),
        )


def fit_tfidf(chunks) -> Vectorizer:
    return Vectorizer.fit(chunks)


# --- trimming preprocessor ----------------------------------------------------


@dataclass(frozen=True)
class TrimConfig:
    trim: int
    qualifiers: dict = field(default_factory=dict)  # tag -> word list
    keeps: dict = field(default_factory=dict)  # tag -> word list


def trim_preprocess(training: TrainingSet, config: TrimConfig, tag, keywords):
    """Reduce each chunk to keyword_index +/- trim tokens; qualifiers and
    keep words found anywhere in the original chunk are prepended (in that
    order). Rows whose keyword cannot be located pass through untrimmed."""
    qualifiers = list(config.qualifiers.get(tag, ()))
    keeps = list(config.keeps.get(tag, ()))
    out = TrainingSet(
        tags=list(training.tags),
        ruleset_path=training.ruleset_path,
        ruleset_hash=training.ruleset_hash,
        sampling_rate=training.sampling_rate,
        seed=training.seed,
        negative_sampling=training.negative_sampling,
    )
    for row in training.rows:
        tokens = row.chunk.split()
        hits = sentence_hits(tokens, keywords)
        if not hits:
            out.warnings.append(f"no keyword found in chunk; left untrimmed: {row.chunk!r}")
            new_text = row.chunk
        else:
            idx = hits[0][0]
            window = tokens[max(0, idx - config.trim): min(len(tokens), idx + config.trim + 1)]
            found_quals = [q for q in qualifiers if q in tokens]
            found_keeps = [k for k in keeps if k in row.chunk]
            new_text = " ".join(found_quals + found_keeps + window)
        out.rows.append(
            type(row)(row.doc_id, new_text, row.rule, row.pw_length, dict(row.tag_values))
        )
    return out


# --- metrics ------------------------------------------------------------------


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def accuracy(self):
        total = self.tp + self.fp + self.fn + self.tn
        return (self.tp + self.tn) / total if total else 0.0

    @property
    def precision(self):
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    @property
    def recall(self):
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) > 0 else 0.0

    def to_dict(self):
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
        }


def evaluate(predictions, labels) -> MetricsReport:
    if len(predictions) != len(labels):
        raise LearningError(
            f"length mismatch: {len(predictions)} predictions vs {len(labels)} labels"
        )
    tp = fp = fn = tn = 0
    for p, y in zip(predictions, labels):
        if y == 1:
            if p == 1:
                tp += 1
            else:
                fn += 1
        else:
            if p == 1:
                fp += 1
            else:
                tn += 1
    return MetricsReport(tp=tp, fp=fp, fn=fn, tn=tn)


def f1_score(precision, recall):
    return 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0


# --- predictors ---------------------------------------------------------------


def _extract_tree(estimator, classes):
    t = estimator.tree_
    klass = [int(classes[int(np.argmax(v[0]))]) for v in t.value]
    # value/impurity are the estimator's full fitted state (class
    # distributions per node); prediction only needs klass, so
    # purification strips them.
    return {
        "feature": [int(f) if cl != -1 else -1 for f, cl in zip(t.feature, t.children_left)],
        "threshold": [float(x) for x in t.threshold],
        "left": [int(x) for x in t.children_left],
        "right": [int(x) for x in t.children_right],
        "klass": klass,
        "value": [[float(x) for x in v[0]] for v in t.value],
        "impurity": [float(x) for x in t.impurity],
    }


def _tree_predict(tree, Xd):
    feat = np.asarray(tree["feature"], dtype=np.int64)
    thr = np.asarray(tree["threshold"], dtype=np.float64)
    left = np.asarray(tree["left"], dtype=np.int64)
    right = np.asarray(tree["right"], dtype=np.int64)
    klass = np.asarray(tree["klass"], dtype=np.int64)
    node = np.zeros(Xd.shape[0], dtype=np.int64)
    while True:
        internal = feat[node] >= 0
        if not internal.any():
            break
        idx = np.nonzero(internal)[0]
        cur = node[idx]
        x = Xd[idx, feat[cur]]
        node[idx] = np.where(x <= thr[cur], left[cur], right[cur])
    return klass[node]


def _predict(family, predictor, X):
    if family == "naive-bayes":
        flp = np.array(predictor["feature_log_prob"])
        prior = np.array(predictor["class_log_prior"])
        scores = X @ flp.T + prior
        return np.asarray(np.argmax(scores, axis=1)).ravel().astype(int)
    if family in ("logistic-regression", "sgd-svm"):
        coef = np.array(predictor["coef"])
        margin = np.asarray(X @ coef).ravel() + predictor["intercept"]
        return (margin > 0).astype(int)
    if family == "random-forest":
        Xd = np.asarray(X.todense()) if sp.issparse(X) else np.asarray(X)
        trees = predictor["trees"]
        votes = np.zeros(Xd.shape[0], dtype=np.int64)
        for tree in trees:
            votes += _tree_predict(tree, Xd)
        return (2 * votes > len(trees)).astype(int)
    raise LearningError(f"unknown family {family!r}")


@dataclass
class ClassifierModel:
    family: str
    tag: str
    params: dict
    vectorizer: Vectorizer
    predictor: dict
    metrics: MetricsReport | None = None
    purified: bool = False
    seed: int = 0

    def predict(self, chunks):
        X = self.vectorizer.transform(chunks)
        return _predict(self.family, self.predictor, X)

    def predict_matrix(self, X):
        return _predict(self.family, self.predictor, X)

    def serialized_size(self):
        return len(json.dumps(self.to_dict()))

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "family": self.family,
            "tag": self.tag,
            "params": self.params,
            "purified": self.purified,
            "seed": self.seed,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "vectorizer": self.vectorizer.to_dict(),
            "predictor": self.predictor,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != FORMAT_VERSION:
            raise LearningError(
                f"model format version {d.get('format_version')} != {FORMAT_VERSION}"
            )
        metrics = None
        if d.get("metrics"):
            m = d["metrics"]
            metrics = MetricsReport(tp=m["tp"], fp=m["fp"], fn=m["fn"], tn=m["tn"])
        return cls(
            family=d["family"],
            tag=d["tag"],
            params=d["params"],
            vectorizer=Vectorizer.from_dict(d["vectorizer"]),
            predictor=d["predictor"],
            metrics=metrics,
            purified=d.get("purified", False),
            seed=d.get("seed", 0),
        )


# --- training -----------------------------------------------------------------


def _fit_family(family, X, y, params, seed):
    if family == "naive-bayes":
        est = MultinomialNB(alpha=params.get("alpha", 1.0))
        est.fit(X, y)
        return {
            "class_log_prior": est.class_log_prior_.tolist(),
            "feature_log_prob": est.feature_log_prob_.tolist(),
        }
    if family == "logistic-regression":
        est = LogisticRegression(C=params.get("C", 1.0), max_iter=1000)
        est.fit(X, y)
        return {"coef": est.coef_[0].tolist(), "intercept": float(est.intercept_[0])}
    if family == "sgd-svm":
        est = SGDClassifier(
            loss="hinge",
            penalty="l2",
            alpha=params.get("alpha", 1e-4),
            learning_rate="optimal",
            max_iter=1000,
            tol=1e-3,
            random_state=seed,
        )
        est.fit(X, y)
        return {"coef": est.coef_[0].tolist(), "intercept": float(est.intercept_[0])}
    if family == "random-forest":
        est = RandomForestClassifier(
            n_estimators=params.get("n_estimators", 100),
            max_depth=params.get("max_depth"),
            criterion="gini",
            max_features="sqrt",
            bootstrap=True,
            random_state=seed,
            n_jobs=1,
        )
        est.fit(X, y)
        classes = est.classes_
        return {"trees": [_extract_tree(t, classes) for t in est.estimators_]}
    raise LearningError(f"unknown family {family!r}")


def _labels_for(training: TrainingSet, tag):
    if tag not in training.tags:
        raise LearningError(f"tag {tag!r} not in training set tags {training.tags}")
    return [row.tag_values[tag] for row in training.rows]


def train(family, training: TrainingSet, tag, params=None, seed=0) -> ClassifierModel:
    """Fit one family on a stratified 80/20 split; metrics come from the
    held-out 20%."""
    if family not in FAMILIES:
        raise LearningError(f"unknown family {family!r}; expected one of {FAMILIES}")
    params = dict(params or {})
    chunks = [row.chunk for row in training.rows]
    labels = _labels_for(training, tag)
    if len(set(labels)) < 2:
        raise LearningError(f"degenerate labels for tag {tag!r}: all {labels[:1]}")

    train_chunks, test_chunks, y_train, y_test = train_test_split(
        chunks, labels, test_size=0.2, stratify=labels, random_state=seed, shuffle=True
    )
    vectorizer = Vectorizer.fit(train_chunks)
    if not vectorizer.vocabulary:
        raise LearningError("empty vocabulary")
    X_train = vectorizer.transform(train_chunks)
    predictor = _fit_family(family, X_train, np.array(y_train), params, seed)
    model = ClassifierModel(
        family=family, tag=tag, params=params, vectorizer=vectorizer,
        predictor=predictor, seed=seed,
    )
    preds = model.predict(test_chunks)
    model.metrics = evaluate(list(preds), list(y_test))
    return model


def _size_rank(family, params):
    """Rough model-size ordering used to break grid-search F1 ties in
    favor of the smaller model."""
    if family == "random-forest":
        depth = params.get("max_depth")
        return (params.get("n_estimators", 100), math.inf if depth is None else depth)
    if family == "logistic-regression":
        return (params.get("C", 1.0),)
    if family == "sgd-svm":
        return (1.0 / params.get("alpha", 1e-4),)
    return (0,)


def grid_search(family, training: TrainingSet, tag, grid=None, seed=0, k=5):
    """Exhaustive search over the parameter lattice with stratified k-fold
    CV; returns (best_params, results). Best = max mean F1, ties to the
    smaller model. Every lattice point's fold scores are in results."""
    grid = DEFAULT_GRIDS[family] if grid is None else grid
    if not grid:
        raise LearningError("empty grid")
    names = sorted(grid)
    points = [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]

    chunks = np.array([row.chunk for row in training.rows], dtype=object)
    labels = np.array(_labels_for(training, tag))
    if len(set(labels.tolist())) < 2:
        raise LearningError(f"degenerate labels for tag {tag!r}")
    n_splits = min(k, int(np.bincount(labels).min()))
    if n_splits < 2:
        raise LearningError("not enough rows per class for cross-validation")
    kfold = StratifiedKFold(n_splits=n_splits, shuffle=True, random_state=seed)

    results = []
    for params in points:
        fold_f1 = []
        for train_idx, test_idx in kfold.split(chunks, labels):
            vec = Vectorizer.fit(list(chunks[train_idx]))
            X_tr = vec.transform(list(chunks[train_idx]))
            predictor = _fit_family(family, X_tr, labels[train_idx], params, seed)
            X_te = vec.transform(list(chunks[test_idx]))
            preds = _predict(family, predictor, X_te)
            fold_f1.append(evaluate(list(preds), list(labels[test_idx])).f1)
        results.append({"params": params, "mean_f1": float(np.mean(fold_f1)), "fold_f1": fold_f1})

    best = max(
        results,
        key=lambda r: (r["mean_f1"],) + tuple(-x for x in _size_rank(family, r["params"])),
    )
    return best["params"], results


# --- purification -------------------------------------------------------------


@contextlib.contextmanager
def _deep_recursion(limit):
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, limit))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def _node_counts(tree, Xd):
    feat = np.asarray(tree["feature"], dtype=np.int64)
    thr = np.asarray(tree["threshold"], dtype=np.float64)
    left = np.asarray(tree["left"], dtype=np.int64)
    right = np.asarray(tree["right"], dtype=np.int64)
    counts = np.zeros(len(feat), dtype=np.int64)

    def descend(node, idx):
        counts[node] = len(idx)
        if feat[node] < 0 or len(idx) == 0:
            return
        go_left = Xd[idx, feat[node]] <= thr[node]
        descend(left[node], idx[go_left])
        descend(right[node], idx[~go_left])

    with _deep_recursion(len(feat) * 2 + 100):
        descend(0, np.arange(Xd.shape[0]))
    return counts


def _prune_tree(tree, counts):
    """Merge same-class sibling leaves and drop branches no training
    sample reaches; both preserve training-set predictions."""
    feat = tree["feature"]
    left, right, thr, klass = tree["left"], tree["right"], tree["threshold"], tree["klass"]

    def prune(node):
        if feat[node] < 0:
            return {"klass": klass[node]}
        lc, rc = left[node], right[node]
        if counts[lc] == 0 and counts[rc] > 0:
            return prune(rc)
        if counts[rc] == 0 and counts[lc] > 0:
            return prune(lc)
        l = prune(lc)
        r = prune(rc)
        if "feature" not in l and "feature" not in r and l["klass"] == r["klass"]:
            return {"klass": l["klass"]}
        return {"feature": feat[node], "threshold": thr[node], "left": l, "right": r,
                "klass": klass[node]}

    with _deep_recursion(len(feat) * 2 + 100):
        root = prune(0)

    out = {"feature": [], "threshold": [], "left": [], "right": [], "klass": []}

    def flatten(n):
        idx = len(out["feature"])
        out["feature"].append(-1)
        out["threshold"].append(-2.0)
        out["left"].append(-1)
        out["right"].append(-1)
        out["klass"].append(int(n["klass"]))
        if "feature" in n:
            out["feature"][idx] = int(n["feature"])
            out["threshold"][idx] = float(n["threshold"])
            li = flatten(n["left"])
            ri = flatten(n["right"])
            out["left"][idx] = li
            out["right"][idx] = ri
        return idx

    with _deep_recursion(len(feat) * 2 + 100):
        flatten(root)
    return out


def purify(model: ClassifierModel, training_chunks):
    """Shrink a random forest without changing its predictions on the
    training set. Other families pass through with a warning flag."""
    if model.family != "random-forest":
        return model, ["purify is a no-op for family " + model.family]
    X = model.vectorizer.transform(training_chunks)
    Xd = np.asarray(X.todense())
    before = model.predict_matrix(X)
    new_trees = []
    for tree in model.predictor["trees"]:
        counts = _node_counts(tree, Xd)
        new_trees.append(_prune_tree(tree, counts))
    purified = ClassifierModel(
        family=model.family, tag=model.tag, params=dict(model.params),
        vectorizer=model.vectorizer, predictor={"trees": new_trees},
        metrics=model.metrics, purified=True, seed=model.seed,
    )
    after = purified.predict_matrix(X)
    if not np.array_equal(before, after):
        raise LearningError("purification changed training-set predictions")
    return purified, []


# --- persistence --------------------------------------------------------------


def model_filename(model: ClassifierModel) -> str:
    code = FAMILY_CODES[model.family]
    f1 = model.metrics.f1 if model.metrics else 0.0
    suffix = "_purified" if model.purified else ""
    return f"{code}_{model.tag}_{f1:.2f}{suffix}.json"


_NAME_RE = re.compile(r"^(nb|logreg|sgd|rf)_(.+)_(\d+\.\d+)(_purified)?$")


def parse_model_filename(name):
    stem = Path(name).stem if name.endswith(".json") else name
    m = _NAME_RE.match(stem)
    if not m:
        raise LearningError(f"cannot parse model filename {name!r}")
    return (CODE_FAMILIES[m.group(1)], m.group(2), float(m.group(3)), m.group(4) is not None)


def save_model(model: ClassifierModel, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / model_filename(model)
    path.write_text(json.dumps(model.to_dict()), encoding="utf-8")
    return path


def load_model(path) -> ClassifierModel:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return ClassifierModel.from_dict(data)


class ModelRegistry:
    """tag -> model file mapping, stored as JSON next to the models."""

    def __init__(self, mapping, base_dir=None):
        self.mapping = dict(mapping)
        self.base_dir = Path(base_dir) if base_dir else None
        self._cache = {}

    @classmethod
    def load(cls, path):
        path = Path(path)
        return cls(json.loads(path.read_text(encoding="utf-8")), base_dir=path.parent)

    def save(self, path):
        Path(path).write_text(json.dumps(self.mapping, indent=2, sort_keys=True), encoding="utf-8")

    def model_for(self, tag) -> ClassifierModel:
        if tag not in self.mapping:
            raise LearningError(f"no model registered for tag {tag!r}")
        if tag not in self._cache:
            p = Path(self.mapping[tag])
            if not p.is_absolute() and self.base_dir:
                p = self.base_dir / p
            self._cache[tag] = load_model(p)
        return self._cache[tag]

    @property
    def tags(self):
        return sorted(self.mapping)
