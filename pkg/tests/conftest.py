import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skillatlas.corpus import corpus_from_ads

C0_ADS = [
    {"id": "j1", "year": 2018, "occupation": "1111", "industry": "A", "skills": ["a", "b"]},
    {"id": "j2", "year": 2018, "occupation": "1111", "industry": "A", "skills": ["a", "b"]},
    {"id": "j3", "year": 2018, "occupation": "2222", "industry": "B", "skills": ["a", "c"]},
    {"id": "j4", "year": 2018, "occupation": "2222", "industry": "B", "skills": ["c"]},
]


@pytest.fixture
def c0():
    """The four-ad reference corpus used throughout the hand-derived examples."""
    return corpus_from_ads(C0_ADS)


def make_corpus(ad_skills, year=2018, occupations=None, **extra):
    """Corpus from a list of skill-name lists, with optional occupation labels."""
    ads = []
    for i, skills in enumerate(ad_skills):
        ads.append(
            {
                "id": f"j{i:04d}",
                "year": year,
                "occupation": occupations[i] if occupations else "1111",
                "skills": list(skills),
                **extra,
            }
        )
    return corpus_from_ads(ads)
