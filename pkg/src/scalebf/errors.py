class ConfigError(ValueError):
    """A filter parameter violates a structural rule."""


class CapacityError(RuntimeError):
    """Insertion into a filter group that is already full."""


class ImageError(ValueError):
    """A serialized filter image is malformed or fails its checksum."""
