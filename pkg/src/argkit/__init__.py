"""Claim assessment with LLM-built bipolar argument trees.

The pieces: `qbaf` (the tree-restricted framework model), `semantics`
(DF-QuAD / Euler / quadratic-energy strength evaluation), `gateway`
(chat-completion backends and prompt protocols), `builder` (tree
generation), `documents` (PDF-to-markdown grounding), `store` +
`service` (persistent debate sessions over HTTP) and `cli`.
"""

__version__ = "0.1.0"
