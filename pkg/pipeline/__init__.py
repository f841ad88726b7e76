"""Pipeline orchestration: run config, commands, validation and the CLI runner."""
