"""Result serialization and subcommand pipelines."""
