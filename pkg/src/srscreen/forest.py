"""Random forest with per-tree class-balanced bootstrap and vote probabilities.

Each tree trains on a balanced sample: n_min rows drawn with replacement
from each class, where n_min is the minority class size.  Trees are CART
style: greedy binary splits minimizing weighted Gini impurity over
midpoints of sorted distinct values, mtry candidate features per node.
A document's probability of relevance is the fraction of trees voting
relevant (leaf majority, ties vote relevant).

Per-tree randomness derives only from (master seed, tree index), so
training is reproducible for any execution order or thread count.  The
split search runs as numba-compiled kernels with an internal splitmix64
generator, keeping tree growth deterministic and fast.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .corpus import RELEVANT, IRRELEVANT


class ForestError(ValueError):
    pass


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    mtry: int | None = None  # None -> ceil(sqrt(n_features))
    max_depth: int | None = None
    min_leaf: int = 1
    seed: int = 0
    balance: str = "downsample_majority"  # or "none"
    threads: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise ForestError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            raise ForestError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.balance not in ("downsample_majority", "none"):
            raise ForestError(f"unknown balance mode {self.balance!r}")
        if self.threads < 1:
            raise ForestError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class Tree:
    """Flattened binary tree; feature == -1 marks a leaf.

    Internal nodes route value <= threshold to left, > threshold to right.
    Leaf votes are the majority class of the training rows that reached
    the leaf, with ties voting relevant.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_rel: np.ndarray
    n_irr: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def votes(self) -> np.ndarray:
        return (self.n_rel >= self.n_irr).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "n_rel": self.n_rel.tolist(),
            "n_irr": self.n_irr.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            n_rel=np.asarray(d["n_rel"], dtype=np.int64),
            n_irr=np.asarray(d["n_irr"], dtype=np.int64),
        )


_U64 = np.uint64


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _U64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    z = z ^ (z >> _U64(31))
    return state, z


@njit(cache=True, nogil=True)
def _grow_tree_kernel(X, y, mtry, min_leaf, max_depth, seed):
    """Grow one CART tree; returns flat node arrays and the node count."""
    n, p = X.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    n_rel = np.zeros(max_nodes, np.int64)
    n_irr = np.zeros(max_nodes, np.int64)

    idx = np.arange(n)
    scratch = np.empty(n, np.int64)
    nz_vals = np.empty(n, np.float64)
    nz_labs = np.empty(n, np.int64)
    sorted_vals = np.empty(n, np.float64)
    sorted_labs = np.empty(n, np.int64)
    feat_perm = np.arange(p)
    # stack rows: node id, start, end, depth
    stack = np.empty((max_nodes, 4), np.int64)

    state = _U64(seed)
    n_nodes = 1
    top = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        n_node = end - start

        total1 = 0
        for i in range(start, end):
            total1 += y[idx[i]]
        n_rel[node] = total1
        n_irr[node] = n_node - total1

        if (
            total1 == 0
            or total1 == n_node
            or n_node < 2 * min_leaf
            or (max_depth >= 0 and depth >= max_depth)
        ):
            continue  # leaf

        # Draw mtry candidate features without replacement (partial shuffle).
        for j in range(mtry):
            state, z = _next_u64(state)
            r = j + int(z % _U64(p - j))
            tmp = feat_perm[j]
            feat_perm[j] = feat_perm[r]
            feat_perm[r] = tmp

        best_score = np.inf
        best_feat = -1
        best_thr = 0.0
        total1f = float(total1)
        n_nodef = float(n_node)

        for j in range(mtry):
            f = feat_perm[j]
            # Gather only nonzero values; the zero rows form one bulk block
            # (feature columns are mostly zeros, so this avoids sorting them).
            nn = 0
            n_zero = 0
            c1_zero = 0
            for i in range(n_node):
                row = idx[start + i]
                v = X[row, f]
                if v != 0.0:
                    nz_vals[nn] = v
                    nz_labs[nn] = y[row]
                    nn += 1
                else:
                    n_zero += 1
                    c1_zero += y[row]
            if nn == 0:
                continue  # constant (all-zero) column
            order = np.argsort(nz_vals[:nn])
            for i in range(nn):
                sorted_vals[i] = nz_vals[order[i]]
                sorted_labs[i] = nz_labs[order[i]]

            # Walk groups of equal value in ascending order (negatives, the
            # zero block, positives); evaluate the boundary before each group.
            i = 0
            zero_done = n_zero == 0
            c1 = 0
            ncnt = 0
            prev_v = 0.0
            while ncnt < n_node:
                if not zero_done and (i >= nn or sorted_vals[i] > 0.0):
                    gv = 0.0
                    gc = n_zero
                    g1 = c1_zero
                    zero_done = True
                else:
                    gv = sorted_vals[i]
                    gc = 0
                    g1 = 0
                    while i < nn and sorted_vals[i] == gv:
                        g1 += sorted_labs[i]
                        gc += 1
                        i += 1
                if ncnt > 0:
                    n_left = ncnt
                    n_right = n_node - ncnt
                    if n_left >= min_leaf and n_right >= min_leaf:
                        n1l = float(c1)
                        n0l = float(n_left - c1)
                        n1r = total1f - n1l
                        n0r = float(n_right) - n1r
                        score = (
                            float(n_left)
                            - (n1l * n1l + n0l * n0l) / float(n_left)
                            + float(n_right)
                            - (n1r * n1r + n0r * n0r) / float(n_right)
                        )
                        if score < best_score:
                            best_score = score
                            best_feat = f
                            thr = (prev_v + gv) / 2.0
                            if thr >= gv:
                                thr = prev_v  # midpoint rounded up; keep <= routing exact
                            best_thr = thr
                c1 += g1
                ncnt += gc
                prev_v = gv

        if best_feat < 0:
            continue  # no valid split (candidate features constant)

        # Stable partition: rows with value <= threshold first.
        n_left = 0
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                scratch[n_left] = idx[i]
                n_left += 1
        n_right = 0
        for i in range(start, end):
            if X[idx[i], best_feat] > best_thr:
                scratch[n_left + n_right] = idx[i]
                n_right += 1
        for i in range(n_node):
            idx[start + i] = scratch[i]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = left_id
        right[node] = right_id

        stack[top, 0] = right_id
        stack[top, 1] = start + n_left
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = left_id
        stack[top, 1] = start
        stack[top, 2] = start + n_left
        stack[top, 3] = depth + 1
        top += 1

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], n_rel[:n_nodes], n_irr[:n_nodes]


@njit(cache=True, nogil=True)
def _predict_votes_kernel(feature, threshold, left, right, vote, offsets, X, out):
    n_trees = offsets.shape[0] - 1
    for r in range(X.shape[0]):
        count = 0
        for t in range(n_trees):
            base = offsets[t]
            node = base
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = base + left[node]
                else:
                    node = base + right[node]
            count += vote[node]
        out[r] = count


def balanced_sample(labels: np.ndarray, seed) -> np.ndarray:
    """Row indices: n_min drawn with replacement from each class.

    seed may be an int or a numpy Generator.  Relevant draws come first.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    labels = np.asarray(labels)
    rel = np.flatnonzero(labels == 1)
    irr = np.flatnonzero(labels == 0)
    if len(rel) == 0 or len(irr) == 0:
        raise ForestError("balanced sampling needs both classes present")
    n_min = min(len(rel), len(irr))
    return np.concatenate(
        [rng.choice(rel, size=n_min, replace=True), rng.choice(irr, size=n_min, replace=True)]
    )


def _resolve_mtry(config: ForestConfig, n_features: int) -> int:
    mtry = config.mtry if config.mtry is not None else math.ceil(math.sqrt(n_features))
    if not 1 <= mtry <= n_features:
        raise ForestError(f"mtry must be in [1, {n_features}], got {mtry}")
    return mtry


def train_tree(X: np.ndarray, y: np.ndarray, config: ForestConfig, tree_seed: int) -> Tree:
    """Grow a single CART tree on the given rows (no resampling here)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ForestError("X must be 2-D with one label per row")
    if X.shape[0] < 2:
        raise ForestError("need at least 2 samples to grow a tree")
    if not ((y == 1).any() and (y == 0).any()):
        raise ForestError("need both classes present to grow a tree")
    mtry = _resolve_mtry(config, X.shape[1])
    max_depth = -1 if config.max_depth is None else config.max_depth
    arrays = _grow_tree_kernel(
        X, y, mtry, config.min_leaf, max_depth, np.uint64(tree_seed & 0xFFFFFFFFFFFFFFFF)
    )
    return Tree(*(np.ascontiguousarray(a) for a in arrays))


def _tree_seeds(master_seed: int, tree_index: int) -> tuple[np.random.Generator, int]:
    """(bootstrap rng, split-kernel seed), both functions of (seed, index) only."""
    root = np.random.SeedSequence(entropy=[master_seed & 0xFFFFFFFFFFFFFFFF, tree_index])
    boot_ss, kernel_ss = root.spawn(2)
    kernel_seed = int(kernel_ss.generate_state(1, np.uint64)[0])
    return np.random.default_rng(boot_ss), kernel_seed


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    config: ForestConfig
    n_features: int
    n_train_relevant: int
    n_train_irrelevant: int
    tree_seeds: tuple[int, ...]
    _flat: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _flattened(self):
        if not self._flat:
            offsets = np.zeros(len(self.trees) + 1, dtype=np.int64)
            for i, t in enumerate(self.trees):
                offsets[i + 1] = offsets[i] + t.n_nodes
            self._flat["offsets"] = offsets
            self._flat["feature"] = np.concatenate([t.feature for t in self.trees])
            self._flat["threshold"] = np.concatenate([t.threshold for t in self.trees])
            self._flat["left"] = np.concatenate([t.left for t in self.trees])
            self._flat["right"] = np.concatenate([t.right for t in self.trees])
            self._flat["vote"] = np.concatenate([t.votes() for t in self.trees])
        return self._flat

    def predict_votes(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if X.shape[1] != self.n_features:
            raise ForestError(
                f"feature dimension mismatch: model expects {self.n_features}, got {X.shape[1]}"
            )
        flat = self._flattened()
        out = np.zeros(X.shape[0], dtype=np.int64)
        _predict_votes_kernel(
            flat["feature"],
            flat["threshold"],
            flat["left"],
            flat["right"],
            flat["vote"],
            flat["offsets"],
            X,
            out,
        )
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting relevant, per row; multiples of 1/n_trees."""
        return self.predict_votes(X) / self.n_trees

    def classify(self, X: np.ndarray, cutoff: float) -> list[str]:
        if not 0.0 <= cutoff <= 1.0:
            raise ForestError(f"cutoff must be in [0, 1], got {cutoff}")
        return [RELEVANT if p >= cutoff else IRRELEVANT for p in self.predict_proba(X)]

    def to_dict(self) -> dict:
        return {
            "format": "srscreen-forest",
            "version": 1,
            "config": {
                "n_trees": self.config.n_trees,
                "mtry": self.config.mtry,
                "max_depth": self.config.max_depth,
                "min_leaf": self.config.min_leaf,
                "seed": self.config.seed,
                "balance": self.config.balance,
            },
            "n_features": self.n_features,
            "n_train_relevant": self.n_train_relevant,
            "n_train_irrelevant": self.n_train_irrelevant,
            "tree_seeds": list(self.tree_seeds),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        if d.get("format") != "srscreen-forest" or d.get("version") != 1:
            raise ForestError("unrecognized forest serialization format")
        cfg = d["config"]
        config = ForestConfig(
            n_trees=cfg["n_trees"],
            mtry=cfg["mtry"],
            max_depth=cfg["max_depth"],
            min_leaf=cfg["min_leaf"],
            seed=cfg["seed"],
            balance=cfg["balance"],
        )
        return cls(
            trees=tuple(Tree.from_dict(t) for t in d["trees"]),
            config=config,
            n_features=d["n_features"],
            n_train_relevant=d["n_train_relevant"],
            n_train_irrelevant=d["n_train_irrelevant"],
            tree_seeds=tuple(d["tree_seeds"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "ForestModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _train_one(X, y, config: ForestConfig, tree_index: int) -> tuple[Tree, int]:
    rng, kernel_seed = _tree_seeds(config.seed, tree_index)
    if config.balance == "downsample_majority":
        rows = balanced_sample(y, rng)
    else:
        rows = rng.choice(len(y), size=len(y), replace=True)
    return train_tree(X[rows], y[rows], config, kernel_seed), kernel_seed


def train_forest(X: np.ndarray, y: np.ndarray, config: ForestConfig) -> ForestModel:
    """Train config.n_trees trees, each on its own balanced bootstrap.

    The result is identical for any thread count because every tree's
    randomness is derived from (config.seed, tree index) alone.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if not ((y == 1).any() and (y == 0).any()):
        raise ForestError("training needs both classes present")
    _resolve_mtry(config, X.shape[1])

    if config.threads == 1:
        results = [_train_one(X, y, config, i) for i in range(config.n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(
                pool.map(lambda i: _train_one(X, y, config, i), range(config.n_trees))
            )
    return ForestModel(
        trees=tuple(t for t, _ in results),
        config=config,
        n_features=X.shape[1],
        n_train_relevant=int((y == 1).sum()),
        n_train_irrelevant=int((y == 0).sum()),
        tree_seeds=tuple(s for _, s in results),
    )
