"""Dataset manifests, filtering and capacity-proportional sharding."""
