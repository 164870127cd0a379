"""Desk-scale end-to-end ASR toolkit for Mandarin-English code-switching speech.

Joint CTC-attention training on a minimal float64 autodiff substrate, with
hierarchical-softmax language identification, subword vocabularies,
speed-based augmentation, shallow/cold language-model fusion, and mixed
error rate scoring.  Ships a synthetic bilingual corpus generator so every
stage runs end-to-end on a laptop.
"""

__version__ = "0.1.0"
