"""Data ingestion modules - feature tables, distance matrices and synthetic datasets."""
