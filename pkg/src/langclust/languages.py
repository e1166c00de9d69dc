"""The 23 IWSLT languages: ISO 639-1 codes, names, and Ethnologue families."""

from __future__ import annotations

from .cluster import TaxonomyTable

PIVOT = "en"

LANGUAGE_NAMES = {
    "ar": "Arabic", "bg": "Bulgarian", "cs": "Czech", "de": "German",
    "el": "Greek", "es": "Spanish", "fa": "Persian", "fr": "French",
    "he": "Hebrew", "hu": "Hungarian", "it": "Italian", "ja": "Japanese",
    "nl": "Dutch", "pl": "Polish", "pt": "Portuguese", "ro": "Romanian",
    "ru": "Russian", "sk": "Slovak", "sl": "Slovenian", "th": "Thai",
    "tr": "Turkish", "vi": "Vietnamese", "zh": "Chinese",
    "en": "English",
}

IWSLT23_CODES = sorted(c for c in LANGUAGE_NAMES if c != PIVOT)

ETHNOLOGUE_FAMILY = {
    "bg": "Indo-European", "cs": "Indo-European", "de": "Indo-European",
    "el": "Indo-European", "es": "Indo-European", "fa": "Indo-European",
    "fr": "Indo-European", "it": "Indo-European", "nl": "Indo-European",
    "pl": "Indo-European", "pt": "Indo-European", "ro": "Indo-European",
    "ru": "Indo-European", "sk": "Indo-European", "sl": "Indo-European",
    "hu": "Uralic",
    "tr": "Turkic",
    "ar": "Afroasiatic", "he": "Afroasiatic",
    "zh": "Sino-Tibetan",
    "ja": "Japonic",
    "th": "Kra-Dai",
    "vi": "Austroasiatic",
}


def default_taxonomy() -> TaxonomyTable:
    return TaxonomyTable(dict(ETHNOLOGUE_FAMILY))
