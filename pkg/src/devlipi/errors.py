"""Exception hierarchy shared by every pipeline stage."""


class DevlipiError(Exception):
    """Base class for all recoverable pipeline errors."""


class EmptyImage(DevlipiError):
    pass


class RangeNotFound(DevlipiError):
    """The line-SE sweep ran out of angles without satisfying its stop rule."""


class EmptyLine(DevlipiError):
    pass


class NoBoxes(DevlipiError):
    pass


class SingleComponent(DevlipiError):
    """Raised by shadow splitting when the box is one fused glyph."""


class EmptyGlyph(DevlipiError):
    pass


class EmptyModifier(DevlipiError):
    pass


class LayoutMismatch(DevlipiError):
    pass


class EmptyLibrary(DevlipiError):
    pass


class BadLabel(DevlipiError):
    pass


class DimensionMismatch(DevlipiError):
    pass


class MisalignedManifests(DevlipiError):
    pass


class StageError(DevlipiError):
    """Wraps a module error with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
