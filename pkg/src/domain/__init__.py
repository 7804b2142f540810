# Domain Layer - Lie algebras, fields, deformations and instantons