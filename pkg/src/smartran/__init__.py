"""Smart SDN-controlled resource allocation simulator."""
