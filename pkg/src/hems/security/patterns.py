"""Injection pattern registry: compiled case-insensitive regexes with risk levels.

Patterns live in a data file (``data/injection_patterns.txt``) so the
registry can be audited and extended without code changes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from pathlib import Path
from typing import Optional

CATEGORIES = (
    "instruction_override",
    "prompt_leak",
    "credential_extraction",
    "role_manipulation",
    "delimiter_injection",
    "behavior_modification",
)


class RiskLevel(IntEnum):
    NONE = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3
    CRITICAL = 4

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "RiskLevel":
        return cls[text.strip().upper()]


@dataclass(frozen=True)
class InjectionPattern:
    id: str
    category: str
    risk: RiskLevel
    pattern: str
    regex: re.Pattern = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "regex", re.compile(self.pattern, re.IGNORECASE))


@dataclass(frozen=True)
class PatternMatch:
    pattern_id: str
    category: str
    risk: RiskLevel


class PatternRegistry:
    """Read-only set of injection patterns; safe to share across threads."""

    def __init__(self, patterns: list[InjectionPattern]):
        self._patterns = tuple(patterns)
        seen = set()
        for p in self._patterns:
            if p.id in seen:
                raise ValueError(f"duplicate pattern id: {p.id}")
            seen.add(p.id)
            if p.category not in CATEGORIES:
                raise ValueError(f"{p.id}: unknown category {p.category!r}")

    def __len__(self) -> int:
        return len(self._patterns)

    @property
    def patterns(self) -> tuple[InjectionPattern, ...]:
        return self._patterns

    def categories(self) -> set[str]:
        return {p.category for p in self._patterns}

    def scan(self, text: str) -> list[PatternMatch]:
        """All patterns matching anywhere in text (case-insensitive)."""
        return [
            PatternMatch(p.id, p.category, p.risk)
            for p in self._patterns
            if p.regex.search(text)
        ]


def parse_pattern_line(line: str) -> Optional[InjectionPattern]:
    """Parse one ``id | category | risk | pattern`` record; None for blanks/comments."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    parts = stripped.split("|", 3)
    if len(parts) != 4:
        raise ValueError(f"malformed pattern record: {line!r}")
    pid, category, risk, pattern = (part.strip() for part in parts)
    return InjectionPattern(pid, category, RiskLevel.parse(risk), pattern)


def load_patterns(path: Optional[Path] = None) -> PatternRegistry:
    """Load the registry from a file, defaulting to the packaged data file."""
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (
            resources.files("hems.security")
            .joinpath("data/injection_patterns.txt")
            .read_text(encoding="utf-8")
        )
    patterns = []
    for line in text.splitlines():
        parsed = parse_pattern_line(line)
        if parsed is not None:
            patterns.append(parsed)
    return PatternRegistry(patterns)
