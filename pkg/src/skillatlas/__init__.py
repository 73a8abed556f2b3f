"""Skills analytics from job-ad corpora: skill and skill-set similarity,
occupation transition prediction, skill recommendations, and technology-
adoption indicators."""

__version__ = "0.1.0"
