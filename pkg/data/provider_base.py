from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from models.boolfn import FunctionRep, load_function
from models.pseudojunta import JuntaCollection, load_collection
from models.space import ProductSpace


class SpecProvider(ABC):
    """
    Abstract base class for input providers.
    A provider yields the raw JSON document for a run; parsing into model objects
    is shared.
    """

    @abstractmethod
    async def get_document(self) -> Dict[str, Any]:
        """
        Fetch the raw input document. Recognized top-level keys:
        - space / function, or the builtin / table shorthands (see load_function)
        - collection (see load_collection)
        """
        pass

    @property
    @abstractmethod
    def source(self) -> str:
        """Human-readable origin, for logs."""
        pass

    async def get_function(self, arith: Optional[str] = None) -> FunctionRep:
        return load_function(await self.get_document(), arith)

    async def get_collection(self, space: ProductSpace) -> Optional[JuntaCollection]:
        doc = await self.get_document()
        if "collection" not in doc:
            return None
        return load_collection(doc["collection"], space)
