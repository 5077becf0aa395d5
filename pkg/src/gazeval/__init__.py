"""Evaluation engine for information-theoretic predictors of reading times.

Subpackages cover the full pipeline: fixation ingestion (`corpus`), a
Kneser-Ney n-gram language model (`ngram`), per-word predictor assembly
(`predictors`), cross-validated delta-log-likelihood regressions
(`regression`), penalized spline models (`gam`), significance machinery
(`stats`) and the command line front end (`cli`, `report`).
"""

__version__ = "0.1.0"
