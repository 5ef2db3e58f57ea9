from enum import Enum


class Cmp(Enum):
    """Outcome of comparing two elements under a partial order."""

    LT = "LT"
    GT = "GT"
    EQ = "EQ"
    INCOMPARABLE = "INCOMPARABLE"

    def flip(self) -> "Cmp":
        return {Cmp.LT: Cmp.GT, Cmp.GT: Cmp.LT}.get(self, self)

    def __str__(self):
        return self.value
