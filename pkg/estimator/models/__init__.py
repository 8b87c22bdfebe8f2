# Models package for estimator domain types