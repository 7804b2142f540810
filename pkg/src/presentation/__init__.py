# Presentation Layer - Command-line handlers