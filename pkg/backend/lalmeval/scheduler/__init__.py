"""Central request controller: permit pool, retries and stagger delays."""
