"""semmap: probabilistic semantic maps of WHEN from parallel corpora.

From verse-aligned Bible translations to per-doculect Kriging areas,
Gaussian-mixture cluster structure and coexpression-pattern
classification, plus the treebank construction-extraction and corpus
statistics used to characterize participle clauses.
"""

__version__ = "0.1.0"
