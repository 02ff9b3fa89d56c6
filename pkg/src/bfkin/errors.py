"""Exception types shared across the package."""


class BfkinError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(BfkinError):
    """Malformed configuration input (unknown key, bad value, missing field)."""


class VacuumCellError(BfkinError):
    """Density fell below the vacuum tolerance in at least one spatial cell."""

    def __init__(self, cell_index: int, density: float):
        self.cell_index = int(cell_index)
        self.density = float(density)
        super().__init__(
            f"vacuum cell at spatial index {cell_index}: density {density:.3e}"
        )


class DegenerateKernelError(BfkinError):
    """Collision kernel produced a non-positive relaxation rate."""


class CflViolationError(BfkinError):
    """Time step exceeds the transport stability limit."""

    def __init__(self, dt: float, dt_max: float):
        self.dt = float(dt)
        self.dt_max = float(dt_max)
        super().__init__(
            f"dt = {dt:.6e} violates the transport CFL condition; "
            f"largest admissible dt = {dt_max:.6e}"
        )


class NumericsError(BfkinError):
    """Non-finite values or a failed nonlinear solve during time stepping."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
