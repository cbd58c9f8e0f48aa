"""raywave - Run Orchestration"""
