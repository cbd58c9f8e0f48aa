"""raywave - Wave Asymptotics Core"""
