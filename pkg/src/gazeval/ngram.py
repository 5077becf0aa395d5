"""Interpolated modified Kneser-Ney n-gram language model.

Supplies p(w_t | context) for surprisal and entropy when no external
score table is given. Word-level whitespace tokens only; subword scoring
is the external adapter's job.

Counts follow the standard scheme: raw occurrence counts at the top
level, continuation counts (distinct left-extension types) at every
lower level. Three discounts per level (for counts 1, 2, >=3) are
estimated from count-of-counts, falling back to 0.75 when degenerate,
and clamped so the discounted mass exactly equals the redistributed
back-off mass; the predictive distribution therefore sums to 1 by
construction.

``<s>`` is context-only and excluded from the prediction vocabulary;
``<unk>`` and ``</s>`` are ordinary vocabulary items.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, ValidationError

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"

LOG2E = math.log2(math.e)


@dataclass
class ContextStats:
    total: int
    n1: int
    n2: int
    n3p: int
    followers: dict[str, int]


@dataclass
class NgramModel:
    order: int
    min_count: int
    vocab: tuple[str, ...]              # prediction vocabulary, sorted; no <s>
    index: dict[str, int]
    # counts[k]: adjusted counts of (k+1)-grams; raw at k == order-1,
    # continuation below. contexts[k]: per-context aggregation of counts[k].
    counts: list[dict[tuple[str, ...], int]]
    contexts: list[dict[tuple[str, ...], ContextStats]]
    discounts: list[tuple[float, float, float]]
    unigram_probs: np.ndarray           # cached level-0 distribution

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def map_token(self, token: str) -> str:
        if token == BOS:
            return BOS
        return token if token in self.index else UNK

    def map_context(self, context: Sequence[str]) -> tuple[str, ...]:
        ctx = tuple(self.map_token(t) for t in context)
        if len(ctx) > self.order - 1:
            ctx = ctx[len(ctx) - (self.order - 1):]
        return ctx

    def log2_prob(self, token: str, context: Sequence[str]) -> float:
        """log2 p(token | context); OOV tokens map to <unk>."""
        w = self.map_token(token)
        if w == BOS:
            raise ValidationError("<s> is context-only and has no probability")
        ctx = self.map_context(context)
        return math.log2(self._prob_scalar(self.index[w], ctx, len(ctx)))

    def _discount(self, level: int, count: int) -> float:
        d1, d2, d3 = self.discounts[level]
        if count >= 3:
            return d3
        if count == 2:
            return d2
        if count == 1:
            return d1
        return 0.0

    def _gamma(self, level: int, stats: ContextStats) -> float:
        d1, d2, d3 = self.discounts[level]
        return (d1 * stats.n1 + d2 * stats.n2 + d3 * stats.n3p) / stats.total

    def _prob_scalar(self, w_idx: int, ctx: tuple[str, ...], k: int) -> float:
        if k == 0:
            return float(self.unigram_probs[w_idx])
        stats = self.contexts[k].get(ctx[-k:])
        lower = self._prob_scalar(w_idx, ctx, k - 1)
        if stats is None or stats.total == 0:
            return lower
        c = stats.followers.get(self.vocab[w_idx], 0)
        top = max(c - self._discount(k, c), 0.0) / stats.total
        return top + self._gamma(k, stats) * lower

    def next_distribution(self, context: Sequence[str]) -> np.ndarray:
        """Full predictive distribution over the vocabulary; sums to 1."""
        ctx = self.map_context(context)
        p = self.unigram_probs.copy()
        for k in range(1, len(ctx) + 1):
            stats = self.contexts[k].get(ctx[-k:])
            if stats is None or stats.total == 0:
                continue
            p *= self._gamma(k, stats)
            for w, c in stats.followers.items():
                p[self.index[w]] += max(c - self._discount(k, c), 0.0) / stats.total
        return p

    def sequence_surprisals(self, tokens: Sequence[str], start_context: Sequence[str] = ()) -> list[float]:
        """Per-token surprisal in bits; the context grows left-to-right."""
        ctx = list(start_context)
        out = []
        for tok in tokens:
            out.append(-self.log2_prob(tok, ctx))
            ctx.append(tok)
        return out

    def perplexity(self, heldout: Iterable[Sequence[str]]) -> float:
        """2 ** (mean surprisal in bits per token), end-of-sequence included."""
        total_bits = 0.0
        n_tokens = 0
        for sent in heldout:
            ctx = [BOS] * (self.order - 1)
            for tok in list(sent) + [EOS]:
                total_bits += -self.log2_prob(tok, ctx)
                ctx.append(self.map_token(tok))
                n_tokens += 1
        if n_tokens == 0:
            raise DataError("empty held-out corpus")
        return 2.0 ** (total_bits / n_tokens)


def _estimate_discounts(count_values: Iterable[int]) -> tuple[float, float, float]:
    """Chen-Goodman discounts from count-of-counts, with 0.75 fallback.

    Clamped to (0, i] per slot so the discounted mass stays an exact
    probability under max(c - D, 0) truncation.
    """
    n = [0, 0, 0, 0, 0]
    for c in count_values:
        if 1 <= c <= 4:
            n[c] += 1
    n1, n2, n3, n4 = n[1], n[2], n[3], n[4]
    ds = [0.75, 0.75, 0.75]
    if n1 > 0 and (n1 + 2 * n2) > 0:
        y = n1 / (n1 + 2 * n2)
        cands = [
            1.0 - 2.0 * y * (n2 / n1) if n1 > 0 else None,
            2.0 - 3.0 * y * (n3 / n2) if n2 > 0 else None,
            3.0 - 4.0 * y * (n4 / n3) if n3 > 0 else None,
        ]
        for i, d in enumerate(cands):
            if d is not None and math.isfinite(d) and d > 0:
                ds[i] = min(d, float(i + 1))
    return ds[0], min(ds[1], 2.0), min(ds[2], 3.0)


def train(corpus: Sequence[Sequence[str]], order: int = 5, min_count: int = 1) -> NgramModel:
    """Count, discount, and assemble the model.

    Tokens with raw count < min_count map to <unk>. Each sequence is
    padded with order-1 <s> on the left and one </s> on the right.
    """
    if order < 1:
        raise ValidationError(f"order must be >= 1, got {order}")
    corpus = [list(sent) for sent in corpus if len(sent) > 0]
    if not corpus:
        raise DataError("empty training corpus")

    raw_unigrams: dict[str, int] = {}
    for sent in corpus:
        for tok in sent:
            raw_unigrams[tok] = raw_unigrams.get(tok, 0) + 1

    vocab_set = {w for w, c in raw_unigrams.items() if c >= min_count and w not in (BOS, EOS, UNK)}
    vocab = tuple(sorted(vocab_set | {UNK, EOS}))
    index = {w: i for i, w in enumerate(vocab)}

    def remap(tok: str) -> str:
        return tok if tok in vocab_set else UNK

    # Top-level raw counts over padded sequences.
    counts: list[dict[tuple[str, ...], int]] = [dict() for _ in range(order)]
    top = counts[order - 1]
    for sent in corpus:
        seq = [BOS] * (order - 1) + [remap(t) for t in sent] + [EOS]
        for i in range(order - 1, len(seq)):
            gram = tuple(seq[i - order + 1: i + 1])
            top[gram] = top.get(gram, 0) + 1

    # Continuation counts: distinct left extensions, derived level by level.
    for k in range(order - 2, -1, -1):
        seen: dict[tuple[str, ...], set[str]] = {}
        for gram in counts[k + 1]:
            suffix = gram[1:]
            seen.setdefault(suffix, set()).add(gram[0])
        counts[k] = {g: len(preds) for g, preds in seen.items()}

    discounts: list[tuple[float, float, float]] = [(0.0, 0.0, 0.0)] * order
    contexts: list[dict[tuple[str, ...], ContextStats]] = [dict() for _ in range(order)]
    for k in range(order):
        discounts[k] = _estimate_discounts(counts[k].values())
        if k == 0:
            continue
        ctx_map: dict[tuple[str, ...], ContextStats] = {}
        for gram, c in counts[k].items():
            ctx, w = gram[:-1], gram[-1]
            stats = ctx_map.get(ctx)
            if stats is None:
                stats = ContextStats(0, 0, 0, 0, {})
                ctx_map[ctx] = stats
            stats.total += c
            stats.followers[w] = c
            if c == 1:
                stats.n1 += 1
            elif c == 2:
                stats.n2 += 1
            else:
                stats.n3p += 1
        contexts[k] = ctx_map

    unigram_probs = _unigram_distribution(counts[0], discounts[0], vocab, index)

    # Levels above what the data supports stay empty; discounts list is
    # indexed by context length so pad for safety.
    model = NgramModel(
        order=order,
        min_count=min_count,
        vocab=vocab,
        index=index,
        counts=counts,
        contexts=contexts,
        discounts=discounts,
        unigram_probs=unigram_probs,
    )
    return model


def _unigram_distribution(unigram_counts: dict[tuple[str, ...], int], ds: tuple[float, float, float], vocab: tuple[str, ...], index: dict[str, int]) -> np.ndarray:
    """Level-0 distribution: discounted counts interpolated with uniform."""
    v = len(vocab)
    p = np.zeros(v, dtype=float)
    # Sorted iteration keeps float accumulation order stable so a
    # save/load round-trip reproduces probabilities bit-for-bit.
    items = sorted((gram[0], c) for gram, c in unigram_counts.items() if gram[0] != BOS)
    total = sum(c for _, c in items)
    if total == 0:
        p[:] = 1.0 / v
        return p
    d1, d2, d3 = ds
    discounted = 0.0
    for w, c in items:
        d = d3 if c >= 3 else (d2 if c == 2 else d1)
        p[index[w]] = max(c - d, 0.0) / total
        discounted += min(c, d)
    gamma = discounted / total
    p += gamma / v
    return p


# ---------------------------------------------------------------------------
# Serialization: documented TSV layout. Header key-value lines, then a
# vocab section, then one row per n-gram: level, ngram, count,
# continuation_count. "count" is populated at the top level (raw
# occurrence counts); "continuation_count" at lower levels; the unused
# column is 0. Discounts are recomputed from the stored counts, so a
# round-trip reproduces probabilities bit-for-bit.
# ---------------------------------------------------------------------------

MAGIC = "#gazeval-ngram v1"


def save(model: NgramModel, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(MAGIC + "\n")
        fh.write(f"order\t{model.order}\n")
        fh.write(f"min_count\t{model.min_count}\n")
        for w in model.vocab:
            fh.write(f"vocab\t{w}\n")
        for k in range(model.order):
            is_top = k == model.order - 1
            for gram in sorted(model.counts[k]):
                c = model.counts[k][gram]
                raw = c if is_top else 0
                cont = 0 if is_top else c
                fh.write(f"ngram\t{k + 1}\t{' '.join(gram)}\t{raw}\t{cont}\n")


def load(path) -> NgramModel:
    path = Path(path)
    if not path.exists():
        raise DataError(f"model file not found: {path}")
    order = None
    min_count = 1
    vocab_list: list[str] = []
    grams: list[tuple[int, tuple[str, ...], int, int]] = []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != MAGIC:
            raise DataError(f"{path}: not a gazeval ngram model (bad magic {first!r})")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            tag = parts[0]
            if tag == "order":
                order = int(parts[1])
            elif tag == "min_count":
                min_count = int(parts[1])
            elif tag == "vocab":
                vocab_list.append(parts[1])
            elif tag == "ngram":
                level = int(parts[1])
                gram = tuple(parts[2].split(" "))
                grams.append((level, gram, int(parts[3]), int(parts[4])))
            else:
                raise DataError(f"{path}:{lineno}: unknown record tag {tag!r}")
    if order is None or not vocab_list:
        raise DataError(f"{path}: truncated model file")

    vocab = tuple(vocab_list)
    index = {w: i for i, w in enumerate(vocab)}
    counts: list[dict[tuple[str, ...], int]] = [dict() for _ in range(order)]
    for level, gram, raw, cont in grams:
        k = level - 1
        counts[k][gram] = raw if k == order - 1 else cont

    discounts: list[tuple[float, float, float]] = [(0.0, 0.0, 0.0)] * order
    contexts: list[dict[tuple[str, ...], ContextStats]] = [dict() for _ in range(order)]
    for k in range(order):
        discounts[k] = _estimate_discounts(counts[k].values())
        if k == 0:
            continue
        ctx_map: dict[tuple[str, ...], ContextStats] = {}
        for gram, c in counts[k].items():
            ctx, w = gram[:-1], gram[-1]
            stats = ctx_map.get(ctx)
            if stats is None:
                stats = ContextStats(0, 0, 0, 0, {})
                ctx_map[ctx] = stats
            stats.total += c
            stats.followers[w] = c
            if c == 1:
                stats.n1 += 1
            elif c == 2:
                stats.n2 += 1
            else:
                stats.n3p += 1
        contexts[k] = ctx_map

    unigram_probs = _unigram_distribution(counts[0], discounts[0], vocab, index)
    return NgramModel(
        order=order,
        min_count=min_count,
        vocab=vocab,
        index=index,
        counts=counts,
        contexts=contexts,
        discounts=discounts,
        unigram_probs=unigram_probs,
    )


def tokenize_line(line: str) -> list[str]:
    return line.split()


def read_corpus(path) -> list[list[str]]:
    """One sentence per line, whitespace tokens."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file not found: {path}")
    sents = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            toks = tokenize_line(line)
            if toks:
                sents.append(toks)
    if not sents:
        raise DataError(f"corpus file {path} contains no tokens")
    return sents


def corpus_frequencies(corpus: Sequence[Sequence[str]]) -> dict[str, float]:
    """Per-billion unigram frequencies derived from a training corpus.

    Non-canonical helper: the canonical frequency path ingests an external
    table. Lowercases, since the frequency lookup is case-folded.
    """
    counts: dict[str, int] = {}
    total = 0
    for sent in corpus:
        for tok in sent:
            w = tok.lower()
            counts[w] = counts.get(w, 0) + 1
            total += 1
    if total == 0:
        raise DataError("empty corpus")
    return {w: max(c / total * 1e9, 1.0) for w, c in counts.items()}
