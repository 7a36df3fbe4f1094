"""vqaedit: curation and robustness evaluation for semantically edited VQA corpora."""

__version__ = "0.1.0"
