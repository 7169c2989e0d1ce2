# Report routing and file writers
