class ConicProgramError(Exception):
    pass


class ProgramFinalizedError(ConicProgramError):
    def __init__(self):
        super().__init__("the program has been built, the builder no longer accepts changes")


class DimensionMismatchError(ConicProgramError, ValueError):
    pass


class SolverUnavailableError(ConicProgramError):
    def __init__(self, solver, installed):
        self.solver = solver
        super().__init__(f"solver {solver!r} is not installed (available: {', '.join(installed) or 'none'})")


class SolverOptionError(ConicProgramError, ValueError):
    pass
