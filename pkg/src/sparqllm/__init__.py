"""Retrieval-augmented natural-language querying over RDF knowledge graphs:
template retrieval, LLM-backed SPARQL generation with a repair loop, result
visualization planning, and the evaluation harnesses for all three stages.
"""

__version__ = "0.1.0"
