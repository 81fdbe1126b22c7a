from typing import Any, Dict, Mapping, Optional

from .provider_base import SpecProvider


class BuiltinProvider(SpecProvider):
    """
    Builds the input document for a named builtin on a p-biased cube, so that
    commands can run without an input file (--builtin NAME --n N --p P).
    """

    def __init__(self, name: str, n: int, p: str = "1/2", params: Optional[Mapping[str, Any]] = None,
                 collection: Optional[Mapping[str, Any]] = None):
        self.name = name
        self.n = n
        self.p = p
        self.params = dict(params or {})
        self.collection = dict(collection) if collection else None

    @property
    def source(self) -> str:
        return f"builtin {self.name}(n={self.n}, p={self.p})"

    async def get_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "space": {"n": self.n, "space": {"kind": "p-biased", "p": self.p}},
            "function": {"kind": "builtin", "name": self.name, "params": self.params},
        }
        if self.collection is not None:
            doc["collection"] = self.collection
        return doc
