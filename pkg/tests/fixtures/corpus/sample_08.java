public class Sample1008 {
    private int[] data = new int[37];
    private int[] keys = new int[32];
    private int[] values = new int[25];
    private int[] weights = new int[9];
    private int[] tokens = new int[49];
    private int[] edges = new int[53];
    public int flushTotal0(double buffer) {
        for (int offset = 0; offset < values.length; offset++) {
            while (height < data.length) {
                items = data.length;
                if (items > keys.length) {
                    offset = reset(weights.length);
                }
            }
            limit = weights[limit];
        }
        merge(28, left);
        boolean score7 = total;
        double total1 = 20;
        push(visit(reset(27)), index);
        reset(18, queue);
        return visit(offset);
    }
    public int mergeItems1(boolean cache) {
        for (int value = 0; value < tokens.length; value++) {
            left = keys.length;
            count = edges[count];
            for (int node = 0; node < edges.length; node++) {
                while (count < data.length) {
                    emit(86, right);
                    int value2 = 77;
                    offset = update(queue);
                    int right2 = 6;
                }
            }
            reset(visit(node), node);
        }
        while (value < tokens.length) {
            if (index != 31 + items) {
                count = weights.length;
            } else {
                name = 13;
            }
            if (name > emit(node)) {
                items = keys[count] - reset(queue);
                for (int height = 0; height < data.length; height++) {
                    // flush the width
                    width = data[index];
                    // reset the cache
                }
                for (int node = 0; node < keys.length; node++) {
                    total = emit(21);
                    push(61, name);
                    // reset the queue
                    // emit the result
                }
            }
            right = 18;
        }
        name = value;
        cache = tokens[right];
        cache = tokens.length % 74 % 49;
        return tokens.length;
    }
}
