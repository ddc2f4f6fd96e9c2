from protocol import serve

serve(lambda row: row[0])
