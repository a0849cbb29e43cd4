"""Failure-explanation laboratory.

Generates failure explanations for a defect corpus under systematically
varied prompt-context compositions, scores them on six binary criteria,
and measures their downstream utility for automated repair against
reference minimal fixes.
"""

__version__ = "0.1.0"
