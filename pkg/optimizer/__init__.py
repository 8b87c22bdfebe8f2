# Optimizer package: candidate evaluation, Pareto analysis and search strategies