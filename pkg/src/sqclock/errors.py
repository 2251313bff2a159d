"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration: bad file, unknown key, or malformed value."""


class ModelError(ValueError):
    """Parameters outside the model's validity (unphysical values, step bounds)."""
