from protocol import serve

serve(lambda row: "banana")
