class SynthesisError(Exception):
    """Base class for problems raised while setting up or running a synthesis."""


class TemplateError(SynthesisError, ValueError):
    pass


class ObjectiveError(SynthesisError, ValueError):
    pass


class PartitionMismatchError(TemplateError):
    def __init__(self, node_id, partition_dim, state_dim):
        self.node_id = node_id
        super().__init__(
            f"node '{node_id}' has {state_dim} state coordinates but its partition lives in R^{partition_dim}"
        )


class RunConfigError(SynthesisError, ValueError):
    """A config or system file that cannot be read or does not validate."""

    def __init__(self, path, messages):
        self.path = path
        self.messages = list(messages)
        super().__init__(f"{path}: " + "; ".join(self.messages))
