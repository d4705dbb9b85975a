"""Exception types shared across the package."""


class ContractError(ValueError):
    """An input violates a documented precondition."""


class ImmersionError(ContractError):
    """A discrete curve has (near-)vanishing derivative somewhere."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""
