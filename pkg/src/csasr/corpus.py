"""Transcripts, utterances, manifests, label merging, and corpus statistics.

Transcripts are ordered token sequences where every token carries a kind
tag: Mandarin character, English word, discourse particle / hesitation,
nonlinguistic signal, or other-language word.  Mandarin tokens are exactly
one CJK character; English words match [A-Za-z'-]+.
"""

from __future__ import annotations

import re
import wave
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .audio import Waveform
from .features import FeatureMatrix

__all__ = [
    "TokenKind",
    "LanguageClass",
    "Token",
    "Transcript",
    "Utterance",
    "ManifestRecord",
    "Manifest",
    "CorpusStats",
    "DISPAR",
    "NLSYMS",
    "default_particles",
    "default_nonlinguistic",
    "parse_transcript",
    "merge_nonlinguistic",
    "tag_languages",
    "classify_transcript",
    "corpus_stats",
    "load_manifest",
    "save_manifest",
]

DISPAR = "<dispar>"
NLSYMS = "<nlsyms>"

_CJK_RE = re.compile(r"[一-鿿]")
_ENGLISH_RE = re.compile(r"[A-Za-z'-]+$")
_PAREN_RE = re.compile(r"\(.+\)$")

_DATA_DIR = Path(__file__).parent / "data"


class TokenKind(Enum):
    MANDARIN_CHAR = "mandarin-char"
    ENGLISH_WORD = "english-word"
    DISCOURSE_PARTICLE = "discourse-particle"
    NONLINGUISTIC = "nonlinguistic"
    OTHER_LANGUAGE = "other-language"


class LanguageClass(Enum):
    MANDARIN = "MANDARIN"
    ENGLISH = "ENGLISH"
    NEUTRAL = "NEUTRAL"


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind

    def __post_init__(self):
        if self.kind is TokenKind.MANDARIN_CHAR and not (
            len(self.surface) == 1 and _CJK_RE.match(self.surface)
        ):
            raise ValueError(f"mandarin-char token must be one CJK character, got {self.surface!r}")
        if self.kind is TokenKind.ENGLISH_WORD and not _ENGLISH_RE.fullmatch(self.surface):
            raise ValueError(f"english-word token must match [A-Za-z'-]+, got {self.surface!r}")


@dataclass(frozen=True)
class Transcript:
    tokens: tuple[Token, ...]

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def text(self):
        return " ".join(t.surface for t in self.tokens)


def default_particles():
    """Discourse particle / hesitation lexicon shipped with the package."""
    return tuple((_DATA_DIR / "particles.txt").read_text("utf-8").split())


def default_nonlinguistic():
    """Nonlinguistic signal lexicon shipped with the package."""
    return tuple((_DATA_DIR / "nonlinguistic.txt").read_text("utf-8").split())


def _split_mixed_piece(piece):
    """Break a whitespace-delimited piece into CJK chars / latin runs / other runs."""
    tokens = []
    run = ""
    run_kind = None

    def flush():
        nonlocal run, run_kind
        if run:
            tokens.append(Token(run, run_kind))
        run, run_kind = "", None

    for ch in piece:
        if _CJK_RE.match(ch):
            flush()
            tokens.append(Token(ch, TokenKind.MANDARIN_CHAR))
        elif _ENGLISH_RE.fullmatch(ch):
            if run_kind is not TokenKind.ENGLISH_WORD:
                flush()
            run += ch
            run_kind = TokenKind.ENGLISH_WORD
        else:
            if run_kind is not TokenKind.OTHER_LANGUAGE:
                flush()
            run += ch
            run_kind = TokenKind.OTHER_LANGUAGE
    flush()
    return tokens


def parse_transcript(text, particle_forms=(), nonling_forms=()):
    """Tokenize a transcript line and assign kind tags.

    Particles and nonlinguistic signals are recognized from the given
    lexicons; parenthesized pieces like "(laughing)" count as nonlinguistic
    regardless.  CJK runs split one token per character.
    """
    particle_forms = set(particle_forms)
    nonling_forms = set(nonling_forms)
    tokens = []
    for piece in text.split():
        if piece == DISPAR:
            tokens.append(Token(DISPAR, TokenKind.DISCOURSE_PARTICLE))
        elif piece == NLSYMS:
            tokens.append(Token(NLSYMS, TokenKind.NONLINGUISTIC))
        elif piece in nonling_forms or _PAREN_RE.fullmatch(piece):
            tokens.append(Token(piece, TokenKind.NONLINGUISTIC))
        elif piece in particle_forms:
            tokens.append(Token(piece, TokenKind.DISCOURSE_PARTICLE))
        elif _ENGLISH_RE.fullmatch(piece):
            tokens.append(Token(piece, TokenKind.ENGLISH_WORD))
        else:
            tokens.extend(_split_mixed_piece(piece))
    return Transcript(tuple(tokens))


def merge_nonlinguistic(transcript, particle_forms, nonling_forms):
    """Collapse particles/hesitations to <dispar> and nonlinguistic signals
    to <nlsyms>; all other tokens pass through.

    This produces "label 2" transcripts; the untouched input is "label 1".
    Idempotent, and never changes the token count.
    """
    particle_forms = set(particle_forms)
    nonling_forms = set(nonling_forms)
    out = []
    for tok in transcript:
        if tok.surface in (DISPAR, NLSYMS):
            out.append(tok)
        elif tok.kind is TokenKind.NONLINGUISTIC or tok.surface in nonling_forms:
            out.append(Token(NLSYMS, TokenKind.NONLINGUISTIC))
        elif tok.kind is TokenKind.DISCOURSE_PARTICLE or tok.surface in particle_forms:
            out.append(Token(DISPAR, TokenKind.DISCOURSE_PARTICLE))
        else:
            out.append(tok)
    return Transcript(tuple(out))


def tag_languages(transcript):
    """Per-token language class: Mandarin chars and English words carry their
    language; everything else (particles, nonlinguistic, other languages) is
    neutral."""
    classes = []
    for tok in transcript:
        if tok.kind is TokenKind.MANDARIN_CHAR:
            classes.append(LanguageClass.MANDARIN)
        elif tok.kind is TokenKind.ENGLISH_WORD:
            classes.append(LanguageClass.ENGLISH)
        else:
            classes.append(LanguageClass.NEUTRAL)
    return classes


def classify_transcript(transcript):
    """CS / MAN / ENG from token content.

    CS iff both Mandarin and English tokens occur; a transcript with neither
    has no class and is rejected.
    """
    classes = set(tag_languages(transcript))
    has_man = LanguageClass.MANDARIN in classes
    has_eng = LanguageClass.ENGLISH in classes
    if has_man and has_eng:
        return "CS"
    if has_man:
        return "MAN"
    if has_eng:
        return "ENG"
    raise ValueError(f"transcript has no Mandarin or English tokens: {transcript.text!r}")


@dataclass
class Utterance:
    """One recording with its transcript and class."""

    utt_id: str
    speaker: str
    transcript: Transcript
    waveform: Waveform | None = None
    features: FeatureMatrix | None = None
    utt_class: str = ""

    def __post_init__(self):
        derived = classify_transcript(self.transcript)
        if not self.utt_class:
            self.utt_class = derived
        elif self.utt_class != derived:
            raise ValueError(
                f"{self.utt_id}: stored class {self.utt_class} does not match "
                f"transcript-derived class {derived}"
            )


@dataclass(frozen=True)
class ManifestRecord:
    utt_id: str
    audio_path: str
    speaker: str
    text: str


@dataclass
class Manifest:
    split: str
    records: list[ManifestRecord] = field(default_factory=list)

    def __post_init__(self):
        ids = [r.utt_id for r in self.records]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate utterance ids in {self.split} manifest: {dupes}")

    def __len__(self):
        return len(self.records)


def save_manifest(path, manifest):
    """One record per line: id, audio path, speaker, transcript (tab-separated)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for r in manifest.records:
            fh.write(f"{r.utt_id}\t{r.audio_path}\t{r.speaker}\t{r.text}\n")


def load_manifest(path, split=None):
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields, got {len(parts)}")
            records.append(ManifestRecord(*parts))
    return Manifest(split or path.stem, records)


@dataclass
class CorpusStats:
    split: str
    n_utts: int
    n_speakers: int
    hours: float | None
    class_percent: dict  # CS/MAN/ENG -> percent of utterances
    switch_ratio: float
    man_to_eng_ratio: float
    eng_to_man_ratio: float
    n_boundaries: int


def _wav_duration_seconds(path):
    with wave.open(str(path), "rb") as fh:
        return fh.getnframes() / fh.getframerate()


def corpus_stats(manifest, particle_forms=(), nonling_forms=(), audio_root=None):
    """Corpus-level statistics including the switch-point ratio.

    The switch-point denominator counts adjacent Mandarin/English-bearing
    token pairs; neutral tokens are transparent.  Audio hours are computed
    from WAV headers when ``audio_root`` is given (every path must resolve).
    """
    if not manifest.records:
        raise ValueError(f"cannot compute statistics of empty manifest {manifest.split!r}")
    class_counts = {"CS": 0, "MAN": 0, "ENG": 0}
    speakers = set()
    boundaries = 0
    m2e = 0
    e2m = 0
    seconds = 0.0
    for rec in manifest.records:
        speakers.add(rec.speaker)
        transcript = parse_transcript(rec.text, particle_forms, nonling_forms)
        class_counts[classify_transcript(transcript)] += 1
        langs = [
            c for c in tag_languages(transcript) if c is not LanguageClass.NEUTRAL
        ]
        for a, b in zip(langs, langs[1:]):
            boundaries += 1
            if a is LanguageClass.MANDARIN and b is LanguageClass.ENGLISH:
                m2e += 1
            elif a is LanguageClass.ENGLISH and b is LanguageClass.MANDARIN:
                e2m += 1
        if audio_root is not None:
            seconds += _wav_duration_seconds(Path(audio_root) / rec.audio_path)
    n = len(manifest.records)
    return CorpusStats(
        split=manifest.split,
        n_utts=n,
        n_speakers=len(speakers),
        hours=seconds / 3600.0 if audio_root is not None else None,
        class_percent={k: 100.0 * v / n for k, v in class_counts.items()},
        switch_ratio=(m2e + e2m) / boundaries if boundaries else 0.0,
        man_to_eng_ratio=m2e / boundaries if boundaries else 0.0,
        eng_to_man_ratio=e2m / boundaries if boundaries else 0.0,
        n_boundaries=boundaries,
    )


def format_stats_table(stats_list):
    """Aligned-column text report over splits (utterances, speakers, hours,
    class ratios, switch points)."""
    header = f"{'split':<8}{'#spk':>6}{'#utt':>8}{'#hrs':>8}{'CS%':>8}{'MAN%':>8}{'ENG%':>8}{'switch%':>9}{'M>E%':>7}{'E>M%':>7}"
    lines = [header]
    for s in stats_list:
        hrs = f"{s.hours:.2f}" if s.hours is not None else "-"
        lines.append(
            f"{s.split:<8}{s.n_speakers:>6}{s.n_utts:>8}{hrs:>8}"
            f"{s.class_percent['CS']:>8.2f}{s.class_percent['MAN']:>8.2f}{s.class_percent['ENG']:>8.2f}"
            f"{100.0 * s.switch_ratio:>9.2f}{100.0 * s.man_to_eng_ratio:>7.2f}{100.0 * s.eng_to_man_ratio:>7.2f}"
        )
    return "\n".join(lines) + "\n"
