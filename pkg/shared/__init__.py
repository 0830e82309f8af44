# Shared schema, errors and settings
