"""Published full-scale IWSLT reference numbers, shipped for side-by-side
display in reports. These came from 23-language experiments with a 90K BPE
vocabulary on GPU clusters and are NOT reproducible at desk scale; they are
labeling fixtures only and must never be used as test expectations."""

from __future__ import annotations

REFERENCE_LABEL = "reference (full scale, not reproduced)"

# BLEU per language, many-to-one (X -> En), by clustering system.
M2O_BLEU = {
    "Random": {
        "ar": 22.90, "bg": 32.18, "cs": 28.88, "de": 30.67, "el": 33.28,
        "es": 28.47, "fa": 19.16, "fr": 24.36, "he": 28.01, "hu": 20.78,
        "it": 26.08, "ja": 10.13, "nl": 33.88, "pl": 18.34, "pt": 31.93,
        "ro": 27.64, "ru": 17.38, "sk": 24.22, "sl": 15.88, "th": 17.94,
        "tr": 18.93, "vi": 25.93, "zh": 14.08,
    },
    "Family": {
        "ar": 25.02, "bg": 32.75, "cs": 30.27, "de": 31.09, "el": 33.61,
        "es": 28.18, "fa": 19.59, "fr": 24.24, "he": 29.42, "hu": 19.07,
        "it": 26.74, "ja": 9.90, "nl": 34.82, "pl": 19.23, "pt": 32.18,
        "ro": 27.91, "ru": 17.58, "sk": 25.89, "sl": 23.97, "th": 18.46,
        "tr": 19.95, "vi": 26.95, "zh": 15.13,
    },
    "Embedding": {
        "ar": 25.27, "bg": 32.52, "cs": 30.97, "de": 31.33, "el": 33.67,
        "es": 28.81, "fa": 19.64, "fr": 25.43, "he": 30.03, "hu": 21.89,
        "it": 27.10, "ja": 11.57, "nl": 35.43, "pl": 20.04, "pt": 32.33,
        "ro": 27.97, "ru": 18.13, "sk": 26.61, "sl": 22.12, "th": 18.46,
        "tr": 22.09, "vi": 26.95, "zh": 15.13,
    },
    "Individual": {
        "ar": 25.43, "bg": 32.87, "cs": 29.15, "de": 32.18, "el": 33.70,
        "es": 29.17, "fa": 18.12, "fr": 27.98, "he": 29.45, "hu": 19.07,
        "it": 27.70, "ja": 9.90, "nl": 34.61, "pl": 18.19, "pt": 32.77,
        "ro": 27.88, "ru": 17.55, "sk": 19.72, "sl": 4.48, "th": 18.46,
        "tr": 19.95, "vi": 26.95, "zh": 15.13,
    },
    "Universal": {
        "ar": 23.26, "bg": 32.47, "cs": 28.86, "de": 30.42, "el": 33.56,
        "es": 28.03, "fa": 19.45, "fr": 23.64, "he": 27.29, "hu": 21.24,
        "it": 26.07, "ja": 12.78, "nl": 34.58, "pl": 19.02, "pt": 30.96,
        "ro": 27.77, "ru": 16.69, "sk": 25.31, "sl": 24.22, "th": 18.27,
        "tr": 18.76, "vi": 26.13, "zh": 14.54,
    },
}

# BLEU per language, one-to-many (En -> X), by clustering system.
O2M_BLEU = {
    "Universal": {
        "ar": 9.80, "bg": 25.84, "cs": 17.89, "de": 22.40, "el": 26.71,
        "es": 28.48, "fa": 12.26, "fr": 22.10, "he": 16.38, "hu": 13.32,
        "it": 25.34, "ja": 10.91, "nl": 26.19, "pl": 10.10, "pt": 28.27,
        "ro": 19.72, "ru": 8.26, "sk": 15.52, "sl": 15.82, "th": 25.06,
        "tr": 9.44, "vi": 26.87, "zh": 9.56,
    },
    "Individual": {
        "ar": 13.13, "bg": 30.04, "cs": 19.84, "de": 25.69, "el": 27.90,
        "es": 29.57, "fa": 12.03, "fr": 22.93, "he": 20.43, "hu": 13.74,
        "it": 26.87, "ja": 10.70, "nl": 29.86, "pl": 11.61, "pt": 28.09,
        "ro": 21.81, "ru": 14.11, "sk": 14.47, "sl": 6.61, "th": 27.41,
        "tr": 11.40, "vi": 28.77, "zh": 10.83,
    },
    "Family": {
        "ar": 13.11, "bg": 27.54, "cs": 19.11, "de": 23.74, "el": 27.78,
        "es": 28.88, "fa": 13.36, "fr": 22.78, "he": 20.26, "hu": 13.74,
        "it": 26.71, "ja": 10.70, "nl": 27.83, "pl": 10.97, "pt": 28.63,
        "ro": 21.13, "ru": 12.80, "sk": 16.91, "sl": 15.73, "th": 27.41,
        "tr": 11.40, "vi": 28.77, "zh": 10.83,
    },
    "Embedding": {
        "ar": 12.37, "bg": 28.85, "cs": 20.81, "de": 25.27, "el": 27.11,
        "es": 28.93, "fa": 13.79, "fr": 22.85, "he": 19.23, "hu": 15.47,
        "it": 26.81, "ja": 13.33, "nl": 29.98, "pl": 11.95, "pt": 28.83,
        "ro": 21.14, "ru": 13.84, "sk": 18.18, "sl": 14.25, "th": 28.55,
        "tr": 12.11, "vi": 29.79, "zh": 10.52,
    },
}

# Training pairs per language (X <-> En).
DATA_SIZES = {
    "ar": 180_000, "bg": 140_000, "cs": 110_000, "de": 180_000, "el": 180_000,
    "es": 180_000, "fa": 70_000, "fr": 180_000, "he": 150_000, "hu": 90_000,
    "it": 180_000, "ja": 90_000, "nl": 140_000, "pl": 140_000, "pt": 180_000,
    "ro": 180_000, "ru": 160_000, "sk": 70_000, "sl": 14_000, "th": 80_000,
    "tr": 130_000, "vi": 130_000, "zh": 180_000,
}

# Embedding-based cluster memberships reported at full scale: 7 clusters in
# the many-to-one setting, 5 in the one-to-many setting.
M2O_EMBEDDING_CLUSTERS = [
    ["vi"],
    ["th"],
    ["zh"],
    ["ja", "tr", "hu"],
    ["he", "ar", "fa"],
    ["ru", "el", "sk", "sl", "bg", "cs", "pl"],
    ["de", "nl", "ro", "it", "fr", "es", "pt"],
]

O2M_EMBEDDING_CLUSTERS = [
    ["ro", "fr", "it", "es", "pt"],
    ["de", "nl"],
    ["sl", "bg", "el", "ru", "sk", "cs", "pl"],
    ["tr", "hu", "zh", "ja"],
    ["vi", "th", "he", "ar", "fa"],
]


def reference_bleu(direction: str, system: str, lang: str) -> float | None:
    table = M2O_BLEU if direction == "many_to_one" else O2M_BLEU
    return table.get(system, {}).get(lang)
