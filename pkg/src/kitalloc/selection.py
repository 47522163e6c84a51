from dataclasses import dataclass, field


@dataclass
class SelectionResult:
    """Individuals recommended for testing on one day.

    ``weights`` holds the sampling weight or score each selected id was drawn
    with and ``propensities`` the logged probability of that selection.
    ``mandatory`` lists ids selected outside the budget (critical group).
    """

    day: int
    ids: list
    strategy: str
    weights: dict = field(default_factory=dict)
    propensities: dict = field(default_factory=dict)
    mandatory: set = field(default_factory=set)
    budgeted: bool = False

    def __len__(self):
        return len(self.ids)

    @property
    def budget_ids(self):
        return [i for i in self.ids if i not in self.mandatory]
