"""Circle-graph 3-colouring: important subgraphs, the clause formula, search procedures and counterexamples."""

__version__ = "0.1.0"
