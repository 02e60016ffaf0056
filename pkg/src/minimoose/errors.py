"""Exception hierarchy shared by all subsystems."""


class MooseError(Exception):
    """Base class for every error raised by minimoose."""


class InputSyntaxError(MooseError):
    def __init__(self, message, line, column=1):
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class ValidationError(MooseError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class BuildError(MooseError):
    pass


class MeshError(MooseError):
    pass


class CapacityError(MooseError):
    pass


class MaterialError(MooseError):
    pass


class AssemblyError(MooseError):
    pass


class SolveError(MooseError):
    pass


class TransferError(MooseError):
    pass


class CheckpointError(MooseError):
    pass
