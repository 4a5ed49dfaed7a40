"""corpusforge: corpus engineering toolkit for low-resource MT benchmarks.

Builds clean parallel benchmarks from noisy bitext (filtering, near-duplicate
removal, leakage-safe splits), trains a statistical word aligner, extracts
bilingual dictionaries, produces code-switched and mixed pretraining data,
scores translations with BLEU/chrF, and analyses noun-class translation
accuracy. All operations are deterministic given a seed.
"""

__version__ = "0.1.0"

from corpusforge.core import (
    MonolingualCorpus,
    ParallelCorpus,
    Sentence,
    SentencePair,
    read_bitext,
    read_corpus,
    write_bitext,
    write_corpus,
)

__all__ = [
    "__version__",
    "Sentence",
    "SentencePair",
    "ParallelCorpus",
    "MonolingualCorpus",
    "read_corpus",
    "read_bitext",
    "write_corpus",
    "write_bitext",
]
