"""The seven support categories and the step items derived from them."""

from __future__ import annotations

from enum import Enum


class Category(str, Enum):
    """Kinds of digital language support, ordered from easiest to hardest."""

    CONTENT = "Content"
    ENCODING = "Encoding"
    SURFACE = "Surface"
    LOCALIZED = "Localized"
    MEANING = "Meaning"
    SPEECH = "Speech"
    ASSISTANT = "Assistant"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "Category":
        for cat in cls:
            if cat.value.lower() == str(name).strip().lower():
                return cat
        raise UnknownCategoryError(name)


class UnknownCategoryError(ValueError):
    def __init__(self, name):
        allowed = ", ".join(c.value for c in Category)
        super().__init__(f"unknown category {name!r}; expected one of: {allowed}")
        self.name = name


CATEGORIES: tuple[Category, ...] = tuple(Category)
CATEGORY_NAMES: tuple[str, ...] = tuple(c.value for c in Category)
N_LEVELS = 4
MAX_SCORE = len(CATEGORIES) * N_LEVELS


def item_ids(categories=CATEGORY_NAMES, n_levels: int = N_LEVELS) -> list[str]:
    """Step item names, category-major: ``Content1 .. Content4, Encoding1, ...``."""
    return [f"{cat}{level}" for cat in categories for level in range(1, n_levels + 1)]
