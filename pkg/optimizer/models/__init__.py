# Models package for search domain types