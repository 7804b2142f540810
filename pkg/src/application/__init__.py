# Application Layer - Scenario building, checks and use cases