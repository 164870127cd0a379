"""Synthetic bilingual corpus generator.

Stands in for a licensed code-switching corpus: language A is a set of
single-character CJK tokens, language B a set of lowercase multi-character
words, and each utterance is a Markov chain over the two languages with a
configurable switch probability per token boundary.  Tokens render as
distinct multi-tone chords (language bands are disjoint, so the languages
are acoustically separable), with optional particles and nonlinguistic
signals sprinkled in so the label-1/label-2 distinction is exercisable.

Everything is deterministic per seed, per utterance, so regenerating a spec
reproduces bit-identical manifests and audio.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .audio import SpectralSignature, Waveform, synth_waveform, write_wav
from .corpus import (
    Manifest,
    ManifestRecord,
    Token,
    TokenKind,
    Transcript,
    Utterance,
    classify_transcript,
    default_nonlinguistic,
    default_particles,
    save_manifest,
)

__all__ = ["SynthSpec", "SynthCorpus", "gen_synthetic", "assign_signatures"]

# chord layout: three partials at f0, f0+DELTA, f0+2.3*DELTA, with each
# language's f0 range confined to its own band
_PARTIAL_DELTA = 130.0
_BAND_A = (300.0, 1500.0)
_BAND_B = (2000.0, 3300.0)
_BAND_SPECIAL = (100.0, 270.0)


@dataclass
class SynthSpec:
    """Recipe for one synthetic corpus."""

    inventory_a: int = 6
    inventory_b: int = 6
    switch_prob: float = 0.3
    min_len: int = 2
    max_len: int = 5
    min_rate: float = 6.0  # tokens per second
    max_rate: float = 10.0
    particle_rate: float = 0.1
    nonling_rate: float = 0.05
    n_train: int = 50
    n_dev: int = 10
    n_eval: int = 10
    n_speakers: int = 4
    start_language: str = "random"  # A | B | random
    sample_rate: int = 8000
    snr_db: float = 30.0
    seed: int = 0
    particles: tuple = field(default_factory=default_particles)
    nonlinguistic: tuple = field(default_factory=default_nonlinguistic)

    def __post_init__(self):
        if self.inventory_a < 1 or self.inventory_b < 1:
            raise ValueError("token inventories must each have at least one entry")
        if not 0.0 <= self.switch_prob <= 1.0:
            raise ValueError(f"switch_prob must be in [0, 1], got {self.switch_prob}")
        if self.min_len < 1 or self.max_len < self.min_len:
            raise ValueError(f"bad length range [{self.min_len}, {self.max_len}]")
        if self.start_language not in ("A", "B", "random"):
            raise ValueError(f"start_language must be A, B, or random, got {self.start_language!r}")
        self.particles = tuple(self.particles)
        self.nonlinguistic = tuple(self.nonlinguistic)

    def tokens_a(self):
        return tuple(chr(0x4E00 + i) for i in range(self.inventory_a))

    def tokens_b(self):
        syllables = ["".join(p) for p in itertools.product("bdgkmnpst", "aeiou")]
        words = ("".join(p) for p in itertools.product(syllables, repeat=2))
        return tuple(itertools.islice(words, self.inventory_b))


def _spread(n, band):
    lo, hi = band
    top = hi - 2.3 * _PARTIAL_DELTA
    if n == 1:
        return [lo]
    step = (top - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def assign_signatures(spec):
    """Deterministic token -> chord table; bands by language so A and B
    never overlap spectrally."""
    table = {}
    for tokens, band in (
        (spec.tokens_a(), _BAND_A),
        (spec.tokens_b(), _BAND_B),
        (spec.particles + spec.nonlinguistic, _BAND_SPECIAL),
    ):
        if not tokens:
            continue
        for tok, f0 in zip(tokens, _spread(len(tokens), band)):
            table[tok] = SpectralSignature(
                freqs=(f0, f0 + _PARTIAL_DELTA, f0 + 2.3 * _PARTIAL_DELTA),
                amps=(1.0, 0.6, 0.35),
            )
    return table


def _gen_transcript(spec, rng):
    inv = {"A": spec.tokens_a(), "B": spec.tokens_b()}
    kind = {"A": TokenKind.MANDARIN_CHAR, "B": TokenKind.ENGLISH_WORD}
    n = int(rng.integers(spec.min_len, spec.max_len + 1))
    if spec.start_language == "random":
        lang = "A" if rng.random() < 0.5 else "B"
    else:
        lang = spec.start_language
    tokens = []
    for i in range(n):
        if i > 0 and rng.random() < spec.switch_prob:
            lang = "B" if lang == "A" else "A"
        surface = inv[lang][int(rng.integers(len(inv[lang])))]
        tokens.append(Token(surface, kind[lang]))
        if spec.particles and rng.random() < spec.particle_rate:
            surface = spec.particles[int(rng.integers(len(spec.particles)))]
            tokens.append(Token(surface, TokenKind.DISCOURSE_PARTICLE))
        if spec.nonlinguistic and rng.random() < spec.nonling_rate:
            surface = spec.nonlinguistic[int(rng.integers(len(spec.nonlinguistic)))]
            tokens.append(Token(surface, TokenKind.NONLINGUISTIC))
    return Transcript(tuple(tokens))


def _gen_utterance(spec, signatures, split, index):
    seq = np.random.SeedSequence([spec.seed, _SPLIT_IDS[split], index])
    rng = np.random.default_rng(seq)
    transcript = _gen_transcript(spec, rng)
    rate = float(rng.uniform(spec.min_rate, spec.max_rate))
    wav_seed = int(rng.integers(2**31))
    waveform = synth_waveform(
        [t.surface for t in transcript],
        signatures,
        rate=rate,
        sample_rate=spec.sample_rate,
        seed=wav_seed,
        snr_db=spec.snr_db,
    )
    speaker = f"spk{int(rng.integers(spec.n_speakers)):02d}"
    return Utterance(
        utt_id=f"{split}-{index:04d}",
        speaker=speaker,
        transcript=transcript,
        waveform=waveform,
    )


_SPLIT_IDS = {"train": 0, "dev": 1, "eval": 2}


@dataclass
class SynthCorpus:
    spec: SynthSpec
    signatures: dict
    splits: dict  # split name -> list[Utterance]

    def manifest(self, split):
        return Manifest(
            split,
            [
                ManifestRecord(u.utt_id, f"wav/{u.utt_id}.wav", u.speaker, u.transcript.text)
                for u in self.splits[split]
            ],
        )

    def write(self, out_dir):
        """Write wav/ files, one manifest per split, and generator metadata."""
        out_dir = Path(out_dir)
        (out_dir / "wav").mkdir(parents=True, exist_ok=True)
        for split, utts in self.splits.items():
            for utt in utts:
                write_wav(out_dir / "wav" / f"{utt.utt_id}.wav", utt.waveform)
            save_manifest(out_dir / f"{split}.tsv", self.manifest(split))
        meta = {
            "spec": asdict(self.spec),
            "signatures": {
                tok: {"freqs": sig.freqs, "amps": sig.amps}
                for tok, sig in sorted(self.signatures.items())
            },
        }
        with open(out_dir / "synth.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
        return out_dir


def gen_synthetic(spec):
    """Generate the three splits of a synthetic corpus with rendered audio."""
    signatures = assign_signatures(spec)
    sizes = {"train": spec.n_train, "dev": spec.n_dev, "eval": spec.n_eval}
    splits = {
        split: [_gen_utterance(spec, signatures, split, i) for i in range(count)]
        for split, count in sizes.items()
        if count > 0
    }
    return SynthCorpus(spec, signatures, splits)
