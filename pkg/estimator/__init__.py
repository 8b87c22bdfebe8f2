# Estimator package: workload lowering, hardware space, cost, carbon and accuracy models