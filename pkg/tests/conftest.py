import random
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from hiscript.jsonl import read_jsonl, read_scripts
from hiscript.model import build_script
from hiscript.scoring import LocalBackend

DATA = Path(str(resources.files("hiscript") / "data"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def raw_records():
    return list(read_jsonl(DATA / "raw_projects.jsonl"))


@pytest.fixture(scope="session")
def gold_corpus():
    return read_scripts(DATA / "gold_scripts.jsonl")


@pytest.fixture
def local():
    return LocalBackend()


@pytest.fixture
def web_design():
    return build_script("How to learn Web Design", [
        ("Finding Web Design Resources", ["check online for web design courses and tutorials",
                                          "look for books at the library"]),
        ("Learning the Basics", ["learn HTML first", "practice CSS layouts"]),
    ])


class FixedEmbeddings:
    """Backend whose embeddings come from a lookup table."""

    name = "fixed"

    def __init__(self, table):
        self.table = {k: np.asarray(v, dtype=float) for k, v in table.items()}

    def embed(self, texts):
        return np.vstack([self.table[t] for t in texts])

    def next_sentence_prob(self, pairs):
        a = self.embed([p[0] for p in pairs])
        b = self.embed([p[1] for p in pairs])
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        return [float((x @ y / (u * v) + 1) / 2) for x, y, u, v in zip(a, b, na, nb)]

    def perplexity(self, texts):
        raise NotImplementedError

    def generate(self, prompt, max_tokens=256, seed=None):
        raise NotImplementedError


def random_text(rng: random.Random, words=(1, 8), nasty=True) -> str:
    pool = ["mix", "the", "batter", "with", "a", "spoon", "To", "Ask", "question:", "subgoals",
            "30%", "x-ray", "naïve", "café", "don't", "(optional)", "e.g.", "1.5", "A,", "B.", "!", "?",
            "ready", "set", "go", "With", "and", "or", "then"]
    if nasty:
        pool += ["a. b", "x, y", "end.", "q. r", "  ", "..", ", ,", ".,", "s .", "tab\tin",
                 "<sect", "section>", "\"quoted\"", "č", "日本", "a\u00a0b", "x.\u00a0\u00a0y", ".\u00a0"]
    n = rng.randint(*words)
    text = " ".join(rng.choice(pool) for _ in range(n)).strip()
    return text or "step"


def random_script(rng: random.Random, nasty=True, max_segments=5, max_steps=5):
    blocks = []
    for _ in range(rng.randint(1, max_segments)):
        sub = random_text(rng, (1, 5), nasty)
        while sub.lower().startswith("how to"):
            sub = "do " + sub
        steps = [random_text(rng, (1, 10), nasty) for _ in range(rng.randint(1, max_steps))]
        blocks.append((sub, steps))
    goal = "How to " + random_text(rng, (1, 4), nasty=False)
    return build_script(goal, blocks, source_id=f"r{rng.randint(0, 10**6)}")
