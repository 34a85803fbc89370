"""Emotion-word vector tables and their pairwise similarity structure.

Class labels are plain integers ``1..c``; this module pins the
correspondence between those integers and emotion words, loads word
vectors from the standard text layout (``"<count> <dim>"`` header, then
one ``"<word> <floats...>"`` line per word), and exposes the inter-class
cosine-similarity matrix that motivates the whole amendment pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

import numpy as np

from .nn import cosine_similarity

#: Word order defines the numerical label k for each emotion (1-based).
DEFAULT_EMOTION_WORDS = (
    "surprised",
    "fear",
    "disgusted",
    "happy",
    "sad",
    "angry",
    "neutral",
)


class VocabularyError(ValueError):
    """Base for embedding-table problems."""


class MissingWordError(VocabularyError):
    """A required word is absent from the embedding file."""


class DuplicateWordError(VocabularyError):
    """A required word occurs more than once in the embedding file."""


class MalformedFileError(VocabularyError):
    """The embedding file violates the text layout."""


@dataclass
class EmotionVocabulary:
    """Ordered emotion words with their vectors; row k-1 belongs to label k."""

    words: list[str]
    vectors: np.ndarray  # (c, dim)

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=float)
        if len(self.words) < 2:
            raise VocabularyError("vocabulary needs at least two words")
        lowered = [w.lower() for w in self.words]
        if len(set(lowered)) != len(lowered):
            raise VocabularyError("vocabulary words must be unique")
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise VocabularyError("vectors must be one row per word")
        if not np.isfinite(self.vectors).all():
            raise VocabularyError("vectors must be finite")
        if (np.linalg.norm(self.vectors, axis=1) == 0.0).any():
            raise VocabularyError("every vector needs a positive norm")

    @property
    def num_classes(self) -> int:
        return len(self.words)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def load_word2vec_text(
    path: str | Path, required_words: tuple[str, ...] | list[str] = DEFAULT_EMOTION_WORDS
) -> EmotionVocabulary:
    """Read a word2vec-style text file and keep exactly ``required_words``.

    The returned vocabulary lists the words in the requested order with
    vectors copied verbatim. Matching is case-insensitive (ASCII lower).
    Raises :class:`MissingWordError`, :class:`DuplicateWordError` or
    :class:`MalformedFileError` accordingly; a duplicated required word is
    an error, never a silent first-occurrence pick.
    """
    path = Path(path)
    wanted = [w.lower() for w in required_words]
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise MalformedFileError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 2:
        raise MalformedFileError(f"{path}:1: header must be '<count> <dim>'")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError as exc:
        raise MalformedFileError(f"{path}:1: non-integer header") from exc
    if count < 1 or dim < 1:
        raise MalformedFileError(f"{path}:1: header values must be positive")
    if len(lines) - 1 != count:
        raise MalformedFileError(
            f"{path}: header promises {count} words, file has {len(lines) - 1} lines"
        )

    found: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            raise MalformedFileError(f"{path}:{lineno}: blank line")
        word = parts[0].lower()
        if len(parts) - 1 != dim:
            raise MalformedFileError(
                f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}"
            )
        if word not in wanted:
            continue
        if word in found:
            raise DuplicateWordError(f"{path}:{lineno}: duplicate word {word!r}")
        try:
            found[word] = np.array([float(tok) for tok in parts[1:]], dtype=float)
        except ValueError as exc:
            raise MalformedFileError(f"{path}:{lineno}: non-numeric value") from exc

    missing = [w for w in wanted if w not in found]
    if missing:
        raise MissingWordError(f"{path}: missing required words {missing}")
    return EmotionVocabulary(words=wanted, vectors=np.stack([found[w] for w in wanted]))


def save_word2vec_text(vocab: EmotionVocabulary, path: str | Path) -> None:
    """Write the vocabulary in the same text layout, full decimal precision."""
    lines = [f"{vocab.num_classes} {vocab.dim}"]
    for word, row in zip(vocab.words, vocab.vectors):
        lines.append(word + " " + " ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def word_vector(vocab: EmotionVocabulary, y: int) -> np.ndarray:
    """Vector for numerical label ``y`` (1-based, per the vocabulary order)."""
    if not 1 <= y <= vocab.num_classes:
        raise ValueError(f"label {y} outside 1..{vocab.num_classes}")
    return vocab.vectors[y - 1].copy()


def similarity_matrix(vocab: EmotionVocabulary) -> np.ndarray:
    """Pairwise cosine similarities between all emotion words (c x c)."""
    c = vocab.num_classes
    m = np.empty((c, c))
    for j in range(c):
        for k in range(j, c):
            m[j, k] = m[k, j] = cosine_similarity(vocab.vectors[j], vocab.vectors[k])
    return m


def fixture_path() -> Path:
    """Path of the bundled 7-emotion, 16-dim embedding fixture."""
    return Path(str(files("ldamend").joinpath("data/emotions_16d.vec")))


def load_fixture_vocabulary() -> EmotionVocabulary:
    """The bundled synthetic vocabulary (no external downloads required)."""
    return load_word2vec_text(fixture_path(), DEFAULT_EMOTION_WORDS)
