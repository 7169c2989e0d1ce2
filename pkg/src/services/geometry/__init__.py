# Domains, sampling and path-length certificates
