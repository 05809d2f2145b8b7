# Network environment, PU traffic and the scenario engine
