from oai_quench_tool.__main__ import main

main()
