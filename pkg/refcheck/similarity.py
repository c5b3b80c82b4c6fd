"""
String normalization and Levenshtein-based similarity
"""

from rapidfuzz.distance import Levenshtein


def normalize(text: str) -> str:
    """
    Lowercase and keep only letters and digits, so that punctuation,
    spacing and case never count as edits
    """
    if not text:
        return ""
    return ''.join(ch for ch in text.lower() if ch.isalnum())


def levenshtein(a: str, b: str) -> int:
    """
    Unit-cost edit distance over Unicode code points
    """
    return Levenshtein.distance(a, b)


def similarity(a: str, b: str) -> float:
    """
    Percentage similarity of two strings in [0, 100]

    Parameters
    ----------
    a : str
        first string, already normalized by the caller if wanted.
    b : str
        second string.

    Returns
    -------
    float
        100 * (1 - distance / longest length); two empty strings are
        identical.

    """
    longest = max(len(a), len(b))
    if longest == 0:
        return 100.0
    return 100.0 * (1 - levenshtein(a, b) / longest)
