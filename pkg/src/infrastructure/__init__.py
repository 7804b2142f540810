# Infrastructure Layer - Scenario storage, report encoding and logging