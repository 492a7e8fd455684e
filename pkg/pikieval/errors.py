class PikiError(Exception):
    pass


class SchemaError(PikiError):
    def __init__(self, column, problem):
        super().__init__(f"{problem} column: {column}")
        self.column = column


class RowParseError(PikiError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LabelError(PikiError, ValueError):
    pass


class EmptyDatasetError(PikiError, ValueError):
    pass


class ConfigurationError(PikiError):
    pass


class TrainingDivergedError(PikiError):
    def __init__(self, iteration, coordinate):
        super().__init__(
            f"non-finite gradient at iteration {iteration}, coordinate {coordinate}"
        )
        self.iteration = iteration
        self.coordinate = coordinate


class ModelFileError(PikiError):
    pass


class ModelHeaderError(ModelFileError):
    pass


class ModelDimensionError(ModelFileError):
    pass


class ModelTruncatedError(ModelFileError):
    def __init__(self, expected, actual):
        super().__init__(
            f"model file truncated: expected {expected} bytes, got {actual}"
        )
        self.expected = expected
        self.actual = actual
