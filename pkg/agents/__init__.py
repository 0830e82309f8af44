# Leader / follower agents and the network orchestrator
