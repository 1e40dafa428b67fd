"""Deterministic miniature benchmark for demos and end-to-end tests.

Four questions over two tiny SQLite databases, chosen so the strategies
disagree in known ways: two questions where majority voting succeeds, one
where the gold cluster is a minority, and one two-candidate tie where the
first-seen cluster is wrong.  Every pool contains a gold-equivalent
candidate, so an oracle-judged tournament scores 100 while majority voting
scores 50.
"""

from __future__ import annotations

import json
import sqlite3
from pathlib import Path
from typing import NamedTuple, Union

CASE_STUDY_QUESTION = (
    "For all the set of cards that has Japanese translation, what is the "
    "percentage of them are only available in non-foil?"
)
CASE_STUDY_EVIDENCE = (
    "set with Japanese translation refers to language = 'Japanese'; "
    "non-foil only refers to isNonFoilOnly = 1"
)
CASE_STUDY_SQL_A = (
    "SELECT CAST(SUM(CASE WHEN T2.isNonFoilOnly = 1 THEN 1 ELSE 0 END) AS REAL) * 100 "
    "/ SUM(T1.language = 'Japanese') "
    "FROM set_translations AS T1 "
    "INNER JOIN sets AS T2 ON T1.setCode = T2.code "
    "INNER JOIN cards AS T3 ON T2.code = T3.setCode;"
)
CASE_STUDY_SQL_B = (
    "SELECT SUM(CASE WHEN isNonFoilOnly = 1 THEN 1 ELSE 0 END) * 100.0 / COUNT(*) "
    "AS percentage_non_foil "
    "FROM sets "
    "WHERE code IN (SELECT setCode FROM set_translations WHERE language = 'Japanese');"
)

# sets with a Japanese translation; 14 of them are non-foil only
_SET_COUNT = 121
_NONFOIL_COUNT = 14
# Card/translation counts are tuned so the two 506 candidates disagree on
# exact values: the per-set ratio is 14*100.0/121 and the join-weighted
# ratio (translations x cards) is (14*100 + 10*83) * 100.0 / (14*100 + 49).
_NONFOIL_CARDS = 100  # cards per non-foil Japanese set
_FOIL_CARDS = 49  # cards on the single foil set that has any
_EXTRA_CARDS = 83  # cards on the non-Japanese set
_EXTRA_LANGUAGES = (
    "French",
    "German",
    "Italian",
    "Spanish",
    "Portuguese (Brazil)",
    "Korean",
    "Russian",
    "Chinese Simplified",
    "Chinese Traditional",
    "Phyrexian",
)


class ToybenchPaths(NamedTuple):
    root: Path
    dataset: Path
    candidates: Path
    db_root: Path


def _fresh_db(path: Path) -> sqlite3.Connection:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        path.unlink()
    return sqlite3.connect(path)


def _create_minishop(path: Path) -> None:
    conn = _fresh_db(path)
    try:
        conn.executescript(
            """
            CREATE TABLE products (
                id INTEGER PRIMARY KEY,
                name TEXT,
                price REAL
            );
            CREATE TABLE orders (
                id INTEGER PRIMARY KEY,
                product_id INTEGER,
                quantity INTEGER,
                FOREIGN KEY (product_id) REFERENCES products (id)
            );
            """
        )
        conn.executemany(
            "INSERT INTO products VALUES (?, ?, ?)",
            [(1, "anvil", 4.0), (2, "rope", 7.0)],
        )
        conn.executemany(
            "INSERT INTO orders VALUES (?, ?, ?)",
            [(1, 1, 3), (2, 2, 1), (3, 1, 2)],
        )
        conn.commit()
    finally:
        conn.close()


def _create_card_games(path: Path) -> None:
    conn = _fresh_db(path)
    try:
        conn.executescript(
            """
            CREATE TABLE sets (
                code TEXT PRIMARY KEY,
                name TEXT,
                isNonFoilOnly INTEGER
            );
            CREATE TABLE set_translations (
                id INTEGER PRIMARY KEY,
                setCode TEXT,
                language TEXT,
                translation TEXT,
                FOREIGN KEY (setCode) REFERENCES sets (code)
            );
            CREATE TABLE cards (
                id INTEGER PRIMARY KEY,
                name TEXT,
                setCode TEXT,
                FOREIGN KEY (setCode) REFERENCES sets (code)
            );
            """
        )
        sets = []
        translations = []
        cards = []
        next_translation = 1
        next_card = 1
        for n in range(1, _SET_COUNT + 1):
            code = f"S{n:03d}"
            nonfoil = 1 if n <= _NONFOIL_COUNT else 0
            sets.append((code, f"Set {n}", nonfoil))
            translations.append((next_translation, code, "Japanese", f"セット{n}"))
            next_translation += 1
            if nonfoil:
                card_count = _NONFOIL_CARDS
            elif n == _NONFOIL_COUNT + 1:
                card_count = _FOIL_CARDS
            else:
                card_count = 0
            for c in range(card_count):
                cards.append((next_card, f"Card {n}-{c}", code))
                next_card += 1
        # One non-foil set translated everywhere except Japanese: it feeds the
        # join-weighted numerator without touching the Japanese denominator.
        code = "EXT"
        sets.append((code, "Set EXT", 1))
        for lang in _EXTRA_LANGUAGES:
            translations.append((next_translation, code, lang, f"Set EXT ({lang})"))
            next_translation += 1
        for c in range(_EXTRA_CARDS):
            cards.append((next_card, f"Card EXT-{c}", code))
            next_card += 1
        conn.executemany("INSERT INTO sets VALUES (?, ?, ?)", sets)
        conn.executemany("INSERT INTO set_translations VALUES (?, ?, ?, ?)", translations)
        conn.executemany("INSERT INTO cards VALUES (?, ?, ?)", cards)
        conn.commit()
    finally:
        conn.close()


_DATASET = [
    {
        "id": "toy-avg",
        "question": "What is the average product price?",
        "evidence": "",
        "db_id": "minishop",
        "gold_sql": "SELECT AVG(price) FROM products",
        "difficulty": "simple",
    },
    {
        "id": "toy-count",
        "question": "How many products cost more than 5?",
        "evidence": "cost refers to price",
        "db_id": "minishop",
        "gold_sql": "SELECT COUNT(*) FROM products WHERE price > 5",
        "difficulty": "moderate",
    },
    {
        "id": "toy-orders",
        "question": "How many units were ordered in total?",
        "evidence": "",
        "db_id": "minishop",
        "gold_sql": "SELECT SUM(quantity) FROM orders",
        "difficulty": "challenging",
    },
    {
        "id": "506",
        "question": CASE_STUDY_QUESTION,
        "evidence": CASE_STUDY_EVIDENCE,
        "db_id": "card_games",
        "gold_sql": CASE_STUDY_SQL_B,
        "difficulty": "challenging",
    },
]

# Pool shapes (clusters by result, in first-seen order):
#   toy-avg:    {0, 2} gold, {1}; candidate 3 fails to execute
#   toy-count:  {0, 2, 3} wrong majority, {1} gold -- majority voting loses
#   toy-orders: {0..4} gold (5 members), {5}, {6} -- the K=3, |C_pos|=5 shape
#   506:        {A}, {B} gold -- 1-vs-1 tie, first-seen cluster is wrong
_CANDIDATES = [
    {
        "question_id": "toy-avg",
        "candidates": [
            "SELECT AVG(price) FROM products",
            "SELECT SUM(price) FROM products",
            "SELECT AVG(p.price) FROM products AS p",
            "SELECT avg_price FROM products",
        ],
        "generator_tag": "toybench",
    },
    {
        "question_id": "toy-count",
        "candidates": [
            "SELECT COUNT(*) FROM products",
            "SELECT COUNT(*) FROM products WHERE price > 5",
            "SELECT COUNT(id) FROM products",
            "SELECT COUNT(name) FROM products",
        ],
        "generator_tag": "toybench",
    },
    {
        "question_id": "toy-orders",
        "candidates": [
            "SELECT SUM(quantity) FROM orders",
            "SELECT SUM(o.quantity) FROM orders o",
            "SELECT SUM(quantity) FROM orders WHERE quantity > 0",
            "SELECT TOTAL(quantity) FROM orders",
            "SELECT SUM(quantity) FROM orders o JOIN products p ON o.product_id = p.id",
            "SELECT COUNT(*) FROM orders",
            "SELECT SUM(quantity) FROM orders WHERE quantity > 1",
        ],
        "generator_tag": "toybench",
    },
    {
        "question_id": "506",
        "candidates": [CASE_STUDY_SQL_A, CASE_STUDY_SQL_B],
        "generator_tag": "toybench",
    },
]


def build_toybench(root: Union[str, Path]) -> ToybenchPaths:
    """Write the databases and JSONL files under ``root``; overwrites."""
    root = Path(root)
    db_root = root / "databases"
    _create_minishop(db_root / "minishop" / "minishop.sqlite")
    _create_card_games(db_root / "card_games" / "card_games.sqlite")
    dataset_path = root / "dataset.jsonl"
    candidates_path = root / "candidates.jsonl"
    with dataset_path.open("w", encoding="utf-8") as fh:
        for row in _DATASET:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    with candidates_path.open("w", encoding="utf-8") as fh:
        for row in _CANDIDATES:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return ToybenchPaths(root=root, dataset=dataset_path, candidates=candidates_path, db_root=db_root)
