class StructuralError(Exception):

    def __init__(self, *args):
        super().__init__(*args)

class DomainMismatchError(Exception):

    def __init__(self, *args):
        super().__init__(*args)

class CapabilityError(Exception):

    def __init__(self, *args):
        super().__init__(*args)

class RealizabilityViolationError(Exception):

    def __init__(self, *args):
        super().__init__(*args)

class ContractError(Exception):

    def __init__(self, *args):
        super().__init__(*args)

class ConfigError(Exception):

    def __init__(self, *args):
        super().__init__(*args)

# Raised by the game loop when a learner or predictor breaks the round protocol.
# The message always starts with the round index.
class ProtocolViolationError(Exception):

    def __init__(self, round_index: int, *args):
        super().__init__(
            "round {}: {}".format(round_index, " ".join(str(a) for a in args))
        )
        self.round_index = round_index
